#pragma once

// Spike mixture machinery for the Gaussian location model. The mixture of the
// d spike alternatives a_n e_i has likelihood ratio
//   L_n(z) = d^{-1} sum_i exp(s z_i - s^2 / 2),   s = sqrt(n) a_n,
// with respect to N_d(0, I), and E_0[L_n^2] - 1 = (e^{s^2} - 1) / d. By
// Cauchy-Schwarz, every test's size and average spike power differ by at most
// sqrt(E_0[L_n^2] - 1).

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "penh/errors.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/mc.hpp"
#include "penh/models.hpp"
#include "penh/stats_core.hpp"

namespace penh {

inline double mixture_likelihood_ratio(std::span<const double> z, long n, long d) {
    detail::require_positive(n, "sample size n");
    detail::require_positive(d, "dimension d");
    if (z.size() != static_cast<std::size_t>(d)) throw DomainError("mixture_likelihood_ratio: length(z) != d");
    const double s = spike_scale(d);
    std::vector<double> logs(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) logs[i] = s * z[i] - 0.5 * s * s;
    return std::exp(stats::log_sum_exp(logs) - std::log(static_cast<double>(d)));
}

/// E_0[L_n^2] - 1 = (e^{s^2} - 1) / d; equals d^{-1/2} - d^{-1} once log d >= 2.
inline double second_moment_minus_one(long n, long d) {
    detail::require_positive(n, "sample size n");
    detail::require_positive(d, "dimension d");
    const double s = spike_scale(d);
    return std::expm1(s * s) / static_cast<double>(d);
}

inline double power_gap_bound(long n, long d) { return std::sqrt(second_moment_minus_one(n, d)); }

struct MixtureDiagnostics {
    long n = 0;
    long d = 0;
    double second_moment_minus_one = 0.0;
    double dimension_bound = 0.0; // d^{-1/2}
    double power_gap_bound = 0.0;

    /// The d^{-1/2} bound only covers d >= 3; for d in {1, 2} the floored
    /// magnitude makes the exact value larger.
    [[nodiscard]] bool within_dimension_bound() const { return second_moment_minus_one <= dimension_bound; }
};

inline MixtureDiagnostics mixture_diagnostics(long n, long d) {
    const double m = second_moment_minus_one(n, d);
    return MixtureDiagnostics{n, d, m, 1.0 / std::sqrt(static_cast<double>(d)), std::sqrt(m)};
}

struct MomentEstimate {
    double mean = 0.0;
    double se = 0.0;
    long reps = 0;
    std::uint64_t seed = 0;
};

struct LikelihoodRatioMoments {
    MomentEstimate first;             // E[L_n]
    MomentEstimate second_minus_one;  // E[L_n^2] - 1
};

/// Monte Carlo moments of L_n with Z drawn under the null (coordinate = 0) or
/// under the spike alternative at `coordinate` (1-based).
inline LikelihoodRatioMoments estimate_likelihood_ratio_moments(long n, long d, const McConfig& mc,
                                                                long coordinate = 0) {
    const GaussianLocationModel model(n, d);
    const ParameterPoint theta = coordinate == 0 ? ParameterPoint::zero(static_cast<std::size_t>(d))
                                                 : spike_alternative(n, d, coordinate).theta();
    const auto m = replicate(mc, StreamTag::mixture_moment, 2,
                             [&](long, RandomStream& rng, Scratch& s, std::span<double> out) {
                                 s.a.resize(static_cast<std::size_t>(d));
                                 model.sample_statistic(theta.theta, rng, s.a);
                                 const double l = mixture_likelihood_ratio(s.a, n, d);
                                 out[0] = l;
                                 out[1] = l * l - 1.0;
                             });
    return {{m[0].mean, m[0].standard_error(), m[0].count, mc.master_seed},
            {m[1].mean, m[1].standard_error(), m[1].count, mc.master_seed}};
}

/// Common-random-numbers sweep over the spike family: replication r draws null
/// noise e_r once; the size uses test(e_r) and coordinate i uses
/// test(e_r + s e_i).
struct SpikeSweep {
    PowerEstimate size;
    PowerEstimate average_spike_power;
    std::vector<PowerEstimate> coordinate_power; // index 0 is coordinate 1
};

inline constexpr long kMinSpikeReps = 1000;

inline SpikeSweep spike_sweep(const TestFunction& test, const GaussianLocationModel& model, const McConfig& mc) {
    if (mc.reps < kMinSpikeReps) throw DomainError("spike power estimation needs at least 1000 replications");
    const auto d = static_cast<std::size_t>(model.d);
    if (test.input_kind() != InputKind::statistic || test.input_dim() != d) {
        throw DomainError("test '" + test.name() + "' does not act on the d-dimensional sufficient statistic");
    }
    const double s = spike_scale(model.d);
    const std::vector<double> zero(d, 0.0);
    // channels: 0 size, 1..d per coordinate, d+1 coordinate average
    const auto m = replicate(mc, StreamTag::spike_power, d + 2,
                             [&](long, RandomStream& rng, Scratch& scratch, std::span<double> out) {
                                 auto& z = scratch.a;
                                 z.resize(d);
                                 model.sample_statistic(zero, rng, z);
                                 out[0] = test(z);
                                 double avg = 0.0;
                                 for (std::size_t i = 0; i < d; ++i) {
                                     const double saved = z[i];
                                     z[i] = saved + s;
                                     const double v = test(z);
                                     z[i] = saved;
                                     out[i + 1] = v;
                                     avg += v;
                                 }
                                 out[d + 1] = avg / static_cast<double>(d);
                             });
    SpikeSweep sweep;
    sweep.size = PowerEstimate::from(m[0], mc.master_seed);
    sweep.average_spike_power = PowerEstimate::from(m[d + 1], mc.master_seed);
    sweep.coordinate_power.reserve(d);
    for (std::size_t i = 0; i < d; ++i) sweep.coordinate_power.push_back(PowerEstimate::from(m[i + 1], mc.master_seed));
    return sweep;
}

/// Stratified estimate of d^{-1} sum_i Power(test, a_n e_i), mc.reps per coordinate.
inline PowerEstimate average_spike_power(const TestFunction& test, const GaussianLocationModel& model,
                                         const McConfig& mc) {
    return spike_sweep(test, model, mc).average_spike_power;
}

struct BlindSpotReport {
    long coordinate = 1;
    SpikeAlternative spike;
    PowerEstimate power_at_spike;
    PowerEstimate size;
    PowerEstimate average_spike_power;
    double gap_bound = 0.0;
    std::string test_name;
    std::string suggested_enhancement; // spike z-test on the found coordinate

    /// |size - average spike power| <= gap bound + 3 (SE_size + SE_avg).
    [[nodiscard]] bool gap_invariant_holds() const {
        return std::abs(size.mean.value() - average_spike_power.mean.value()) <=
               gap_bound + 3.0 * (size.se + average_spike_power.se);
    }
};

/// Spike coordinate where the test's estimated power is smallest (lowest index on ties).
inline BlindSpotReport find_blind_spot(const TestFunction& test, const GaussianLocationModel& model,
                                       const McConfig& mc) {
    const SpikeSweep sweep = spike_sweep(test, model, mc);
    std::size_t best = 0;
    for (std::size_t i = 1; i < sweep.coordinate_power.size(); ++i) {
        if (sweep.coordinate_power[i].mean.value() < sweep.coordinate_power[best].mean.value()) best = i;
    }
    const long coordinate = static_cast<long>(best) + 1;
    BlindSpotReport report;
    report.coordinate = coordinate;
    report.spike = spike_alternative(model.n, model.d, coordinate);
    report.power_at_spike = sweep.coordinate_power[best];
    report.size = sweep.size;
    report.average_spike_power = sweep.average_spike_power;
    report.gap_bound = power_gap_bound(model.n, model.d);
    report.test_name = test.name();
    report.suggested_enhancement = "spike:i=" + std::to_string(coordinate);
    return report;
}

/// The enhancement component the report suggests.
inline TestFunction suggested_enhancement(const BlindSpotReport& report) {
    return spike_z_test(report.spike.n, report.spike.d, report.coordinate);
}

} // namespace penh
