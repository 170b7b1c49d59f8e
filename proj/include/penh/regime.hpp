#pragma once

// Dimension regimes d = d(n) and the experiments that sweep them.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "penh/errors.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/mc.hpp"
#include "penh/mixture.hpp"
#include "penh/models.hpp"
#include "penh/simulate.hpp"
#include "penh/stats_core.hpp"
#include "penh/test_spec.hpp"

namespace penh {

struct DimensionRule {
    enum class Kind { fixed, ceil_log, power, linear };
    Kind kind = Kind::linear;
    double param = 0.0;

    [[nodiscard]] long operator()(long n) const {
        detail::require_positive(n, "sample size n");
        const double nd = static_cast<double>(n);
        switch (kind) {
        case Kind::fixed: return static_cast<long>(param);
        case Kind::ceil_log: return std::max(1L, static_cast<long>(std::ceil(param * std::log(nd))));
        case Kind::power: return std::max(1L, static_cast<long>(std::ceil(std::pow(nd, param))));
        case Kind::linear: return n;
        }
        return n;
    }

    [[nodiscard]] bool unbounded() const { return kind != Kind::fixed; }

    [[nodiscard]] std::string to_string() const {
        switch (kind) {
        case Kind::fixed: return "fixed:" + detail::fmt_num(param);
        case Kind::ceil_log: return "ceil_log:" + detail::fmt_num(param);
        case Kind::power: return "power:" + detail::fmt_num(param);
        case Kind::linear: return "linear";
        }
        return "linear";
    }
};

/// Accepts "linear", "fixed:5", "ceil_log:2", "power:0.5" and the
/// parenthesised forms "fixed(5)" etc.
inline DimensionRule parse_dimension_rule(std::string_view text) {
    std::string s = detail::trim(text);
    std::string name = s;
    std::optional<std::string> arg;
    if (const auto colon = s.find(':'); colon != std::string::npos) {
        name = s.substr(0, colon);
        arg = s.substr(colon + 1);
    } else if (const auto paren = s.find('('); paren != std::string::npos) {
        if (s.back() != ')') throw SpecError("bad dimension rule '" + s + "'");
        name = s.substr(0, paren);
        arg = s.substr(paren + 1, s.size() - paren - 2);
    }
    DimensionRule rule;
    if (name == "linear") {
        if (arg) throw SpecError("linear takes no argument");
        rule.kind = DimensionRule::Kind::linear;
        return rule;
    }
    if (!arg) throw SpecError("dimension rule '" + name + "' needs an argument");
    rule.param = detail::parse_real(*arg, "dimension rule");
    if (name == "fixed") {
        rule.kind = DimensionRule::Kind::fixed;
        if (rule.param < 1 || rule.param != std::floor(rule.param)) throw DomainError("fixed(d) needs an integer d >= 1");
    } else if (name == "ceil_log") {
        rule.kind = DimensionRule::Kind::ceil_log;
        if (!(rule.param > 0)) throw DomainError("ceil_log(c) needs c > 0");
    } else if (name == "power") {
        rule.kind = DimensionRule::Kind::power;
        if (!(rule.param > 0 && rule.param <= 1)) throw DomainError("power(gamma) needs 0 < gamma <= 1");
    } else {
        throw SpecError("unknown dimension rule '" + name + "'");
    }
    return rule;
}

inline std::vector<long> parse_n_grid(std::string_view text) {
    std::vector<long> grid;
    const std::string s = detail::trim(text);
    if (s.empty()) return grid;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        const long n = detail::parse_integer(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos),
                                             "n-grid");
        if (n < 1) throw DomainError("n-grid entries must be >= 1");
        if (!grid.empty() && n < grid.back()) throw DomainError("n-grid must be non-decreasing");
        grid.push_back(n);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return grid;
}

struct RegimeSpec {
    DimensionRule d_rule;
    std::vector<long> n_grid;
    double alpha = 0.05;

    void validate() const {
        detail::require_alpha(alpha);
        for (std::size_t k = 1; k < n_grid.size(); ++k) {
            if (n_grid[k] < n_grid[k - 1]) throw DomainError("n-grid must be non-decreasing");
        }
    }
};

/// theta_n as a function of (n, d): zero, a spike alternative, or
/// c * n^{-rate} * e_i.
struct ThetaRule {
    enum class Kind { zero, spike, local };
    Kind kind = Kind::zero;
    long coordinate = 1;
    double scale = 1.0;
    double rate = 0.0;

    [[nodiscard]] ParameterPoint at(long n, long d) const {
        if (coordinate < 1 || coordinate > d) throw DomainError("theta rule coordinate outside [1, d]");
        switch (kind) {
        case Kind::zero: return ParameterPoint::zero(static_cast<std::size_t>(d));
        case Kind::spike: return spike_alternative(n, d, coordinate).theta();
        case Kind::local: {
            Vector v(static_cast<std::size_t>(d), 0.0);
            v[static_cast<std::size_t>(coordinate - 1)] = scale * std::pow(static_cast<double>(n), -rate);
            return ParameterPoint(std::move(v));
        }
        }
        return ParameterPoint::zero(static_cast<std::size_t>(d));
    }

    [[nodiscard]] std::string to_string() const {
        switch (kind) {
        case Kind::zero: return "zero";
        case Kind::spike: return "spike:i=" + std::to_string(coordinate);
        case Kind::local:
            return "local:c=" + detail::fmt_num(scale) + ":rate=" + detail::fmt_num(rate) + ":i=" +
                   std::to_string(coordinate);
        }
        return "zero";
    }
};

/// "zero", "spike[:i=k]", "local[:c=..][:rate=..][:i=k]".
inline ThetaRule parse_theta_rule(std::string_view text) {
    const std::string s = detail::trim(text);
    const auto colon = s.find(':');
    const std::string name = s.substr(0, colon);
    ThetaRule rule;
    if (name == "zero") rule.kind = ThetaRule::Kind::zero;
    else if (name == "spike") rule.kind = ThetaRule::Kind::spike;
    else if (name == "local") rule.kind = ThetaRule::Kind::local;
    else throw SpecError("unknown theta rule '" + name + "'");
    std::size_t pos = colon;
    while (pos != std::string::npos) {
        const auto next = s.find(':', pos + 1);
        const std::string pair = s.substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1);
        const auto eq = pair.find('=');
        if (eq == std::string::npos) throw SpecError("expected key=value in theta rule, got '" + pair + "'");
        const std::string key = detail::trim(pair.substr(0, eq));
        const std::string value = pair.substr(eq + 1);
        if (key == "i" && rule.kind != ThetaRule::Kind::zero) rule.coordinate = detail::parse_integer(value, "theta.i");
        else if (key == "c" && rule.kind == ThetaRule::Kind::local) rule.scale = detail::parse_real(value, "theta.c");
        else if (key == "rate" && rule.kind == ThetaRule::Kind::local) rule.rate = detail::parse_real(value, "theta.rate");
        else throw SpecError("theta rule '" + name + "' has no parameter '" + key + "'");
        pos = next;
    }
    if (rule.coordinate < 1) throw DomainError("theta rule coordinate must be >= 1");
    return rule;
}

struct ResultRow {
    long n = 0;
    long d = 0;
    std::string test;
    std::string theta;
    PowerEstimate size;
    PowerEstimate power;
    std::optional<PowerEstimate> enhanced_power;
    std::optional<double> gap_bound;
    double wall_time_s = 0.0;
};

/// Builds the model a test spec needs at (n, d).
inline Model make_model(const TestSpec& spec, long n, long d) {
    if (required_model(spec) == "regression") return FixedDesignRegression::with_default_design(n, d);
    return GaussianLocationModel(n, d);
}

/// For each n in the grid: d = d_rule(n), build the test and measure its size
/// and power. Without a theta rule the alternative is the test's blind spot
/// (Gaussian location only) and the enhanced column is the test combined
/// with the spike z-test suggested for that coordinate. With a theta rule the
/// alternative is theta_n and the enhancement targets its largest coordinate.
inline std::vector<ResultRow> run_regime(const RegimeSpec& regime, const std::string& test_spec, const McConfig& mc,
                                         const std::optional<ThetaRule>& theta_rule = std::nullopt) {
    regime.validate();
    mc.validate();
    const TestSpec spec = parse_test_spec(test_spec);
    std::vector<ResultRow> rows;
    for (const long n : regime.n_grid) {
        const auto start = std::chrono::steady_clock::now();
        const long d = regime.d_rule(n);
        const Model model = make_model(spec, n, d);
        TestContext ctx{n, d, regime.alpha, &model, default_calibration()};
        const TestFunction phi = build_test(spec, ctx);

        ResultRow row;
        row.n = n;
        row.d = d;
        row.test = phi.name();
        const auto* gauss = std::get_if<GaussianLocationModel>(&model);
        const bool on_statistic = phi.input_kind() == InputKind::statistic;

        if (!theta_rule) {
            if (!gauss || !on_statistic) {
                throw SpecError("blind-spot regimes need a Gaussian location test on the sufficient statistic; "
                                "pass a theta rule for '" + phi.name() + "'");
            }
            const BlindSpotReport report = find_blind_spot(phi, *gauss, mc);
            const TestFunction psi = enhance(phi, suggested_enhancement(report));
            row.theta = "spike:i=" + std::to_string(report.coordinate);
            row.size = report.size;
            row.power = report.power_at_spike;
            row.enhanced_power = estimate_rejection_prob(psi, model, report.spike.theta(), mc);
            row.gap_bound = report.gap_bound;
        } else {
            const ParameterPoint theta = theta_rule->at(n, d);
            row.theta = theta_rule->to_string();
            row.size = estimate_rejection_prob(phi, model, ParameterPoint::zero(static_cast<std::size_t>(d)), mc);
            row.power = estimate_rejection_prob(phi, model, theta, mc);
            if (gauss && on_statistic) {
                std::size_t top = 0;
                for (std::size_t i = 1; i < theta.dim(); ++i) {
                    if (std::abs(theta.theta[i]) > std::abs(theta.theta[top])) top = i;
                }
                const TestFunction psi = enhance(phi, spike_z_test(n, d, static_cast<long>(top) + 1));
                row.enhanced_power = estimate_rejection_prob(psi, model, theta, mc);
                row.gap_bound = power_gap_bound(n, d);
            }
        }
        row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ConsistencyPoint {
    long n = 0;
    long d = 0;
    double criterion = 0.0;   // d^{-1/2} n ||theta_n||^2
    double chi2_power = 0.0;  // exact power of the chi-square test at level alpha
};

/// Trajectory of d(n)^{-1/2} n ||theta_n||_2^2 next to the exact chi-square
/// test power 1 - F_{d, lambda}(q_{1-alpha}) with lambda = n ||theta_n||^2.
inline std::vector<ConsistencyPoint> consistency_diagnostic(const ThetaRule& theta_rule, const RegimeSpec& regime) {
    regime.validate();
    std::vector<ConsistencyPoint> out;
    for (const long n : regime.n_grid) {
        const long d = regime.d_rule(n);
        const ParameterPoint theta = theta_rule.at(n, d);
        const double norm = theta.norm();
        const double lambda = static_cast<double>(n) * norm * norm;
        const int dof = static_cast<int>(d);
        const double q = stats::chi2_quantile(dof, 1.0 - regime.alpha);
        const double power = 1.0 - stats::noncentral_chi2_cdf(dof, lambda, q).value();
        out.push_back({n, d, lambda / std::sqrt(static_cast<double>(d)), stats::Probability::clamped(power)});
    }
    return out;
}

} // namespace penh
