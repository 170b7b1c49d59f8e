#pragma once

// Distributional checks: Kolmogorov-Smirnov helpers, the LAN remainder of
// each model, the embedding equivalence check and the non-testability curve.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "penh/errors.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/mc.hpp"
#include "penh/models.hpp"
#include "penh/simulate.hpp"
#include "penh/stats_core.hpp"

namespace penh {

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        // Small-lambda form: P(K <= l) = sqrt(2 pi)/l sum exp(-(2k-1)^2 pi^2 / (8 l^2)).
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            cdf += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample KS test with the Stephens small-sample correction.
inline KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        dmax = std::max({dmax, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double root = std::sqrt(n);
    return {dmax, kolmogorov_survival((root + 0.12 + 0.11 / root) * dmax)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double dmax = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        dmax = std::max(dmax, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {dmax, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * dmax)};
}

/// Central sequence Z_{n,d} at theta = 0 computed from the model's statistic.
inline Eigen::VectorXd central_sequence(const Model& model, std::span<const double> statistic) {
    struct Visitor {
        std::span<const double> x;
        Eigen::VectorXd operator()(const GaussianLocationModel& m) const {
            return Eigen::Map<const Eigen::VectorXd>(x.data(), m.d);
        }
        Eigen::VectorXd operator()(const ScaledGaussianModel& m) const {
            const double dd = static_cast<double>(m.d);
            return Eigen::Map<const Eigen::VectorXd>(x.data(), m.d) *
                   (std::sqrt(static_cast<double>(m.n)) / (dd * dd * dd));
        }
        Eigen::VectorXd operator()(const FixedDesignRegression& m) const {
            const Vector z = regression_central_sequence(m, x);
            return Eigen::Map<const Eigen::VectorXd>(z.data(), m.d);
        }
    };
    return std::visit(Visitor{statistic}, model);
}

/// log dP_theta / dP_0 evaluated from the Gaussian density of the statistic.
inline double log_likelihood_ratio(const Model& model, std::span<const double> theta, std::span<const double> x) {
    struct Visitor {
        std::span<const double> theta;
        std::span<const double> x;
        double operator()(const GaussianLocationModel& m) const {
            const double root_n = std::sqrt(static_cast<double>(m.n));
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double r = x[i] - root_n * theta[i];
                s += 0.5 * (x[i] * x[i] - r * r);
            }
            return s;
        }
        double operator()(const ScaledGaussianModel& m) const {
            const double var = m.mean_sd() * m.mean_sd();
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double r = x[i] - theta[i];
                s += (x[i] * x[i] - r * r) / (2.0 * var);
            }
            return s;
        }
        double operator()(const FixedDesignRegression& m) const {
            const Eigen::VectorXd mean = m.design() * Eigen::Map<const Eigen::VectorXd>(theta.data(), m.d);
            const double var = m.noise_sd() * m.noise_sd();
            double s = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double r = x[k] - mean[static_cast<Eigen::Index>(k)];
                s += (x[k] * x[k] - r * r) / (2.0 * var);
            }
            return s;
        }
    };
    return std::visit(Visitor{theta, x}, model);
}

/// Same model family rebuilt at sample size n (regression keeps noise sd and
/// uses the default orthonormal design).
inline Model model_at(const Model& prototype, long n, long d) {
    struct Visitor {
        long n;
        long d;
        Model operator()(const GaussianLocationModel&) const { return GaussianLocationModel(n, d); }
        Model operator()(const ScaledGaussianModel&) const { return ScaledGaussianModel(n, d); }
        Model operator()(const FixedDesignRegression& m) const {
            return FixedDesignRegression::with_default_design(n, d, m.noise_sd());
        }
    };
    return std::visit(Visitor{n, d}, prototype);
}

struct RemainderSummary {
    long n = 0;
    long d = 0;
    long reps = 0;
    double p95_abs_remainder = 0.0;
    double max_abs_remainder = 0.0;
};

/// For each n: draws the statistic under the null, evaluates the exact
/// log-likelihood ratio at h / sqrt(n) and reports the distribution of
/// |log LR - (h'Z - h' I h / 2)|.
inline std::vector<RemainderSummary> lan_remainder_check(const Model& prototype, const Vector& h,
                                                         const std::vector<long>& n_grid, const McConfig& mc) {
    if (h.empty()) throw DomainError("lan_remainder_check: empty local parameter");
    const long d = static_cast<long>(h.size());
    std::vector<RemainderSummary> out;
    for (const long n : n_grid) {
        const Model model = model_at(prototype, n, d);
        Vector theta(h);
        for (double& v : theta) v /= std::sqrt(static_cast<double>(n));
        require_membership(model, ParameterPoint(theta));
        const Eigen::Map<const Eigen::VectorXd> hv(h.data(), d);
        const double quad = 0.5 * hv.dot(information_matrix(model) * hv);
        const Vector zero(static_cast<std::size_t>(d), 0.0);
        const std::size_t len = statistic_dim(model);
        auto remainders = replicate_values(mc, StreamTag::lan, [&](long, RandomStream& rng, Scratch& s) {
            s.a.resize(len);
            std::visit([&](const auto& m) { m.sample_statistic(zero, rng, s.a); }, model);
            const double exact = log_likelihood_ratio(model, theta, s.a);
            const double lan = hv.dot(central_sequence(model, s.a)) - quad;
            return std::abs(exact - lan);
        });
        RemainderSummary summary{n, d, mc.reps, 0.0, *std::max_element(remainders.begin(), remainders.end())};
        summary.p95_abs_remainder = empirical_quantile(remainders, 0.95);
        out.push_back(summary);
    }
    return out;
}

struct EmbeddingReport {
    long d1 = 0;
    long d2 = 0;
    long n = 0;
    long reps = 0;
    std::uint64_t seed = 0;
    std::vector<KsResult> coordinate_ks;  // one per embedded coordinate
    double min_p_value = 1.0;
    bool ks_rejects = false;               // any p-value below 1e-3
    double exact_tv = 0.0;                 // closed-form TV between the two laws
    double first_mean_large = 0.0;         // first coordinate, d2-experiment
    double first_mean_large_se = 0.0;
    double first_mean_small = 0.0;         // first coordinate, d1-experiment
    double first_mean_small_se = 0.0;
    double expected_first_mean = 0.0;      // sqrt(n) theta_1
    PowerEstimate pulled_back_rejection;   // chi2 test on the first d1 coordinates, d2-experiment
    PowerEstimate direct_rejection;        // the same test in the d1-experiment
};

inline constexpr double kKsLevel = 1e-3;

/// Compares the first d1 coordinates of the GaussianLocation(n, d2) statistic
/// at embed(theta, d2) with the GaussianLocation(n, d1) statistic at theta.
inline EmbeddingReport embedding_equivalence_check(long d1, long d2, const ParameterPoint& theta, long n,
                                                   const McConfig& mc) {
    if (d1 >= d2) throw DomainError("embedding check needs d1 < d2");
    if (static_cast<long>(theta.dim()) != d1) throw DomainError("theta must have dimension d1");
    mc.validate();
    const GaussianLocationModel small(n, d1);
    const GaussianLocationModel large(n, d2);
    const ParameterPoint embedded = embed(theta, d2);

    const auto draw = [&](const GaussianLocationModel& model, const ParameterPoint& at, StreamTag tag) {
        std::vector<std::vector<double>> columns(static_cast<std::size_t>(d1),
                                                 std::vector<double>(static_cast<std::size_t>(mc.reps)));
        // Each replication writes only its own slot of every column.
        replicate(mc, tag, 0, [&](long r, RandomStream& rng, Scratch& s, std::span<double>) {
            s.a.resize(static_cast<std::size_t>(model.d));
            model.sample_statistic(at.theta, rng, s.a);
            for (std::size_t j = 0; j < columns.size(); ++j) columns[j][static_cast<std::size_t>(r)] = s.a[j];
        });
        return columns;
    };
    const auto large_cols = draw(large, embedded, StreamTag::embedding_large);
    const auto small_cols = draw(small, theta, StreamTag::embedding_small);

    EmbeddingReport report;
    report.d1 = d1;
    report.d2 = d2;
    report.n = n;
    report.reps = mc.reps;
    report.seed = mc.master_seed;
    for (long j = 0; j < d1; ++j) {
        const auto ks = ks_two_sample(large_cols[static_cast<std::size_t>(j)], small_cols[static_cast<std::size_t>(j)]);
        report.coordinate_ks.push_back(ks);
        report.min_p_value = std::min(report.min_p_value, ks.p_value);
    }
    report.ks_rejects = report.min_p_value < kKsLevel;

    // Both laws are N_{d1}(sqrt(n) theta, I): the mean shift between them is the
    // difference of the two mean vectors.
    double shift2 = 0.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (long j = 0; j < d1; ++j) {
        const double diff = root_n * embedded.theta[static_cast<std::size_t>(j)] - root_n * theta.theta[static_cast<std::size_t>(j)];
        shift2 += diff * diff;
    }
    report.exact_tv = stats::gaussian_tv(std::sqrt(shift2)).value();

    Moments ml;
    Moments ms;
    for (double v : large_cols[0]) ml.add(v);
    for (double v : small_cols[0]) ms.add(v);
    report.first_mean_large = ml.mean;
    report.first_mean_large_se = ml.standard_error();
    report.first_mean_small = ms.mean;
    report.first_mean_small_se = ms.standard_error();
    report.expected_first_mean = root_n * theta.theta[0];

    // A d1-test pulled back through the projection onto the first d1 coordinates.
    const TestFunction direct = chi2_euclidean_test(n, d1, 0.05);
    const TestFunction pulled("pullback(" + direct.name() + ")", static_cast<std::size_t>(d2), direct.nominal_level(),
                              [direct, d1](std::span<const double> z) {
                                  return direct(z.first(static_cast<std::size_t>(d1)));
                              });
    report.pulled_back_rejection = estimate_rejection_prob(pulled, Model(large), embedded, mc);
    report.direct_rejection = estimate_rejection_prob(direct, Model(small), theta, mc);
    return report;
}

struct NontestabilityPoint {
    long n = 0;
    double tv_bound = 0.0;
};

/// With d = n, the sufficient-mean laws at any theta in (-1,1)^n and at 0 are
/// N_n(theta, n^2 I) and N_n(0, n^2 I), whose TV is gaussian_tv(||theta|| / n)
/// <= gaussian_tv(n^{-1/2}).
inline std::vector<NontestabilityPoint> nontestability_curve(const std::vector<long>& n_grid) {
    std::vector<NontestabilityPoint> out;
    for (const long n : n_grid) {
        detail::require_positive(n, "sample size n");
        out.push_back({n, stats::gaussian_tv(1.0 / std::sqrt(static_cast<double>(n))).value()});
    }
    return out;
}

} // namespace penh
