// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli_cases.hpp"
#include "oracles.hpp"
#include "penh/penh.hpp"

using namespace penh;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " FAILED(" << what << ")";
        }
    }
    template <class T>
    void note(const std::string& key, const T& value) {
        detail << " " << key << "=" << value;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// AC1
void chi2_exact_size(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const Model model = GaussianLocationModel(100, 10);
    const auto est = estimate_rejection_prob(chi2_euclidean_test(100, 10, 0.05), model, ParameterPoint::zero(10),
                                             McConfig{100000, 101, 1});
    const double elapsed = seconds_since(t0);
    c.note("size", fmt(est.mean.value()));
    c.note("seconds", fmt(elapsed));
    c.require(std::abs(est.mean.value() - 0.05) <= 0.0021, "size within 0.0021 of 0.05");
    c.require(elapsed < 10.0, "runtime < 10 s");
}

// AC2
void mixture_second_moment(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const double exact = second_moment_minus_one(100, 16);
    const auto m = estimate_likelihood_ratio_moments(100, 16, McConfig{1000000, 102, 1}).second_minus_one;
    const double elapsed = seconds_since(t0);
    c.note("analytic", fmt(exact));
    c.note("mc", fmt(m.mean));
    c.note("se", fmt(m.se));
    c.note("seconds", fmt(elapsed));
    c.require(std::abs(exact - 0.1875) < 1e-15, "analytic value 0.1875");
    c.require(std::abs(m.mean - exact) <= 3.0 * m.se, "MC within 3 SE");
    c.require(m.mean <= 0.25, "MC <= d^-1/2");
    c.require(elapsed < 60.0, "runtime < 60 s");
}

// AC3
void power_gap_bound_family(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const long n = 256;
    const long d = 256;
    const GaussianLocationModel model(n, d);
    const double bound = std::sqrt(1.0 / std::sqrt(double(d)) - 1.0 / double(d));
    c.note("bound", fmt(power_gap_bound(n, d)));
    c.require(std::abs(power_gap_bound(n, d) - bound) < 1e-12, "bound = sqrt(d^-1/2 - d^-1)");
    const std::vector<TestFunction> family{chi2_euclidean_test(n, d, 0.05), sup_norm_test(n, d), spike_z_test(n, d, 1),
                                           enhance(chi2_euclidean_test(n, d, 0.05), spike_z_test(n, d, 1)),
                                           halfspace_test(d, 0.05, 42)};
    for (const auto& t : family) {
        const auto sweep = spike_sweep(t, model, McConfig{10000, 103, 1});
        const double gap = std::abs(sweep.size.mean.value() - sweep.average_spike_power.mean.value());
        c.note(t.name(), fmt(gap));
        c.require(gap <= bound + 3.0 * (sweep.size.se + sweep.average_spike_power.se), t.name() + " gap");
    }
    const double elapsed = seconds_since(t0);
    c.note("seconds", fmt(elapsed));
    c.require(elapsed < 300.0, "runtime < 5 min");
}

// AC4
void spike_closed_forms(Check& c) {
    const long n = 100;
    const long d = static_cast<long>(std::ceil(std::exp(8.0)));
    const double size = spike_z_exact_size(d);
    const double power = spike_z_exact_power(d);
    c.note("d", d);
    c.note("exact_size", fmt(size));
    c.note("exact_power", fmt(power));
    const double s = std::sqrt(0.5 * std::log(double(d)));
    c.require(std::abs(size - 2.0 * oracle::normal_cdf(-std::sqrt(s))) < 1e-12, "size = 2 Phi(-sqrt s)");
    c.require(std::abs(size - 0.1573) < 5e-5, "size ~ 0.1573");
    c.require(std::abs(power - 0.7214) < 5e-4, "power ~ 0.7214");
    const Model model = GaussianLocationModel(n, d);
    const TestFunction t = spike_z_test(n, d, 1);
    const auto mc_size = estimate_rejection_prob(t, model, ParameterPoint::zero(d), McConfig{100000, 104, 1});
    const auto mc_power = estimate_rejection_prob(t, model, spike_alternative(n, d, 1).theta(), McConfig{100000, 105, 1});
    c.note("mc_size", fmt(mc_size.mean.value()));
    c.note("mc_power", fmt(mc_power.mean.value()));
    c.require(within_se(mc_size, size, 3.0), "MC size within 3 SE");
    c.require(within_se(mc_power, power, 3.0), "MC power within 3 SE");
    for (int k = 3; k <= 12; ++k) {
        const long dk = static_cast<long>(std::ceil(std::exp(double(k))));
        const long dp = static_cast<long>(std::ceil(std::exp(double(k - 1))));
        c.require(spike_z_exact_size(dk) < spike_z_exact_size(dp), "size decreasing at k=" + std::to_string(k));
        c.require(spike_z_exact_power(dk) > spike_z_exact_power(dp), "power increasing at k=" + std::to_string(k));
    }
}

// AC5
void enhancement_combinator(Check& c) {
    const GaussianLocationModel model(256, 256);
    const auto row = enhanceability_row(chi2_euclidean_test(256, 256, 0.05), model, McConfig{10000, 106, 1});
    const double gain = row.power_psi.mean.value() - row.power_phi.mean.value();
    c.note("coordinate", row.coordinate);
    c.note("violations", row.dominance_violations);
    c.note("size_phi", fmt(row.size_phi.mean.value()));
    c.note("size_nu", fmt(row.size_nu.mean.value()));
    c.note("size_psi", fmt(row.size_psi.mean.value()));
    c.note("power_gain", fmt(gain));
    c.require(row.dominance_violations == 0, "psi >= phi on every sampled statistic");
    c.require(row.size_psi.mean.value() <=
                  row.size_phi.mean.value() + row.size_nu.mean.value() + 3.0 * row.size_psi.se,
              "size(psi) <= size(phi) + size(nu) + 3 SE");
    c.require(gain >= 0.3, "power gain >= 0.3 at the blind spot");
}

// AC6
void nontestability_criterion(Check& c) {
    const auto pts = penh::nontestability_curve({100, 1000, 10000});
    double prev = 2.0;
    for (const auto& p : pts) {
        const double exact = 2.0 * oracle::normal_cdf(0.5 / std::sqrt(double(p.n))) - 1.0;
        c.note("n" + std::to_string(p.n), fmt(p.tv_bound));
        c.require(std::abs(p.tv_bound - exact) <= 1e-12, "oracle match at n=" + std::to_string(p.n));
        c.require(p.tv_bound < prev, "strictly decreasing");
        prev = p.tv_bound;
    }
    c.require(pts.size() == 3, "three grid points");
}

// AC7
void fixed_dimension_signature(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const long d = 5;
    {
        const long n = 100;
        const Model model = FixedDesignRegression::with_default_design(n, d);
        const double crit = wald_critical_value(d, 0.05);
        const TestFunction wald = wald_test(std::get<FixedDesignRegression>(model), crit, 0.05);
        Vector theta(d, 0.0);
        theta[0] = 10.0 / std::sqrt(double(n));
        const auto power = estimate_rejection_prob(wald, model, ParameterPoint(theta), McConfig{100000, 107, 1});
        const double exact = 1.0 - oracle::noncentral_chi2_cdf(int(d), 100.0, crit * crit);
        c.note("wald_power", fmt(power.mean.value()));
        c.note("wald_exact", fmt(exact));
        c.require(power.mean.value() > 0.999, "Wald power > 0.999");
        c.require(within_se(power, exact, 3.0), "Wald power matches closed form within 3 SE");
    }
    double prev = -1.0;
    for (const long n : {100L, 1000L, 10000L}) {
        const GaussianLocationModel g(n, d);
        const Model model(g);
        const TestFunction t = truncated_score_test(g, 0.05, default_truncation(d), default_calibration());
        Vector theta(d, 0.0);
        theta[0] = std::pow(double(n), -0.25);
        const auto power = estimate_rejection_prob(t, model, ParameterPoint(theta), McConfig{20000, 108, 1});
        c.note("truncscore_n" + std::to_string(n), fmt(power.mean.value()));
        c.require(power.mean.value() > prev, "truncated-score power strictly increasing at n=" + std::to_string(n));
        prev = power.mean.value();
    }
    c.require(prev >= 0.99, "truncated-score power >= 0.99 at n=1e4");
    const double elapsed = seconds_since(t0);
    c.note("seconds", fmt(elapsed));
    c.require(elapsed < 300.0, "runtime < 5 min");
}

// AC8
void lan_remainder(Check& c) {
    const Vector h{0.7, -1.2, 0.4};
    const std::vector<long> grid{10, 100, 1000, 10000};
    for (const Model& proto : {Model(GaussianLocationModel(10, 3)), Model(FixedDesignRegression::with_default_design(10, 3))}) {
        double worst = 0.0;
        for (const auto& row : lan_remainder_check(proto, h, grid, McConfig{2000, 109, 1})) {
            worst = std::max(worst, row.p95_abs_remainder);
            c.require(row.p95_abs_remainder < 1e-12, model_name(proto) + " at n=" + std::to_string(row.n));
        }
        c.note(model_name(proto) + "_max_p95", fmt(worst));
    }
}

// AC9
void reproducibility(Check& c) {
    int compared = 0;
    for (const auto& cs : cli_cases::all()) {
        for (const char* format : {"csv", "json"}) {
            auto args = cs.args;
            args.insert(args.end(), {"--format", format});
            const auto base = cli_cases::run_with_workers(args, 1);
            c.require(base.code == 0, cs.subcommand + " " + format + " exit 0");
            for (int w : {4, 8}) {
                const auto other = cli_cases::run_with_workers(args, w);
                c.require(other.code == 0 && other.out == base.out,
                          cs.subcommand + " " + format + " workers=" + std::to_string(w));
                ++compared;
            }
        }
    }
    c.note("comparisons", compared);
}

// AC10
void stats_core_oracles(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_cdf = 0.0;
    double worst_sym = 0.0;
    for (double x = -8.0; x <= 8.0; x += 0.125) {
        worst_cdf = std::max(worst_cdf, std::abs(stats::std_normal_cdf(x).value() - oracle::normal_cdf(x)));
        worst_sym = std::max(worst_sym, std::abs(stats::std_normal_cdf(x).value() + stats::std_normal_cdf(-x).value() - 1.0));
    }
    double worst_q = 0.0;
    for (int k = 1; k <= 99; ++k) {
        const double p = k / 100.0;
        worst_q = std::max(worst_q, std::abs(stats::std_normal_cdf(stats::std_normal_quantile(p)).value() - p));
    }
    double worst_chi2 = 0.0;
    double worst_round = 0.0;
    double worst_nc0 = 0.0;
    for (int dof = 1; dof <= 64; ++dof) {
        for (int k = 1; k <= 99; ++k) {
            const double p = k / 100.0;
            worst_round = std::max(worst_round, std::abs(stats::chi2_cdf(dof, stats::chi2_quantile(dof, p)).value() - p));
        }
        for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0}) {
            worst_chi2 = std::max(worst_chi2, std::abs(stats::chi2_cdf(dof, x).value() - oracle::chi2_cdf(dof, x)));
            worst_nc0 = std::max(worst_nc0,
                                 std::abs(stats::noncentral_chi2_cdf(dof, 0.0, x).value() - stats::chi2_cdf(dof, x).value()));
        }
    }
    double worst_tv = 0.0;
    for (double s : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0}) {
        worst_tv = std::max(worst_tv, std::abs(stats::gaussian_tv(s).value() - (2.0 * oracle::normal_cdf(s / 2.0) - 1.0)));
    }
    // TV as the acceptance-region difference P_s(X > s/2) - P_0(X > s/2), 1e6 draws each.
    bool tv_mc_ok = true;
    for (double s : {0.1, 0.5, 1.0}) {
        const auto m = replicate(McConfig{1000000, 110, 1}, StreamTag::sampling_check, 1,
                                 [s](long, RandomStream& rng, Scratch&, std::span<double> out) {
                                     const double a = rng.normal() + s;
                                     const double b = rng.normal();
                                     out[0] = (a > s / 2 ? 1.0 : 0.0) - (b > s / 2 ? 1.0 : 0.0);
                                 });
        tv_mc_ok = tv_mc_ok && std::abs(m[0].mean - stats::gaussian_tv(s).value()) <= 3.0 * m[0].standard_error();
    }
    const double elapsed = seconds_since(t0);
    c.note("cdf_err", fmt(worst_cdf));
    c.note("chi2_err", fmt(worst_chi2));
    c.note("roundtrip_err", fmt(worst_round));
    c.note("noncentral0_err", fmt(worst_nc0));
    c.note("seconds", fmt(elapsed));
    c.require(worst_cdf <= 1e-12, "Phi vs oracle 1e-12");
    c.require(worst_sym <= 1e-14, "Phi symmetry 1e-14");
    c.require(worst_q <= 1e-10, "normal quantile round-trip 1e-10");
    c.require(worst_chi2 <= 1e-12, "chi2 cdf vs oracle 1e-12");
    c.require(worst_round <= 1e-10, "chi2 quantile round-trip 1e-10");
    c.require(worst_nc0 <= 1e-12, "noncentral at 0 equals central 1e-12");
    c.require(worst_tv <= 1e-12, "TV closed form 1e-12");
    c.require(tv_mc_ok, "TV acceptance-region MC within 3 SE");
    c.require(elapsed < 30.0, "runtime < 30 s");
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
        {"AC1 chi-square exact size", chi2_exact_size},
        {"AC2 mixture second moment", mixture_second_moment},
        {"AC3 power-gap bound for five tests", power_gap_bound_family},
        {"AC4 spike z-test closed forms", spike_closed_forms},
        {"AC5 enhancement combinator", enhancement_combinator},
        {"AC6 non-testability curve", nontestability_criterion},
        {"AC7 fixed-dimension signature", fixed_dimension_signature},
        {"AC8 LAN remainder", lan_remainder},
        {"AC9 reproducibility across worker counts", reproducibility},
        {"AC10 stats_core oracle suite", stats_core_oracles},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Check c;
        try {
            run(c);
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail << " EXCEPTION(" << e.what() << ")";
        }
        std::printf("[%s] %s:%s\n", c.ok ? "PASS" : "FAIL", name, c.detail.str().c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
