#pragma once

// End-to-end enhancement: size of the supplied test, its blind spot, the
// spike z-test for that coordinate, and the combined test.

#include <cmath>
#include <string>
#include <vector>

#include "penh/errors.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/mc.hpp"
#include "penh/mixture.hpp"
#include "penh/models.hpp"
#include "penh/regime.hpp"
#include "penh/test_spec.hpp"

namespace penh {

struct DemoRow {
    long n = 0;
    long d = 0;
    long coordinate = 1;
    double gap_bound = 0.0;
    PowerEstimate size_phi;
    PowerEstimate power_phi;   // at the blind spot
    PowerEstimate size_nu;
    PowerEstimate power_nu;
    PowerEstimate size_psi;
    PowerEstimate power_psi;
    double exact_size_nu = 0.0;
    double exact_power_nu = 0.0;
    long dominance_violations = 0; // sampled statistics with psi < phi
    bool blind_spot_within_gap = false;
    bool nu_detects_blind_spot = false;
    bool size_below_one = false;

    /// Finite-n signature of an enhanceable test.
    [[nodiscard]] bool enhanceable() const {
        return size_below_one && blind_spot_within_gap && nu_detects_blind_spot && dominance_violations == 0;
    }
};

struct DemoReport {
    std::string test;
    std::string d_rule;
    double alpha = 0.05;
    long reps = 0;
    std::uint64_t seed = 0;
    std::vector<DemoRow> rows;
    bool nu_size_decreasing = true;  // exact closed form along the grid
    bool nu_power_increasing = true; // exact closed form along the grid

    [[nodiscard]] bool enhanceable() const {
        if (rows.empty()) return false;
        for (const auto& r : rows) {
            if (!r.enhanceable()) return false;
        }
        return true;
    }
};

inline DemoRow enhanceability_row(const TestFunction& phi, const GaussianLocationModel& model, const McConfig& mc) {
    const BlindSpotReport spot = find_blind_spot(phi, model, mc);
    const TestFunction nu = suggested_enhancement(spot);
    const TestFunction psi = enhance(phi, nu);
    const auto d = static_cast<std::size_t>(model.d);
    const auto k = static_cast<std::size_t>(spot.coordinate - 1);
    const double s = spike_scale(model.d);
    const std::vector<double> zero(d, 0.0);

    // channels: phi, nu, psi at the null draw; phi, nu, psi at draw + s e_k; violations
    const auto m = replicate(mc, StreamTag::demo, 7, [&](long, RandomStream& rng, Scratch& scratch, std::span<double> out) {
        auto& z = scratch.a;
        z.resize(d);
        model.sample_statistic(zero, rng, z);
        out[0] = phi(z);
        out[1] = nu(z);
        out[2] = psi(z);
        const double saved = z[k];
        z[k] = saved + s;
        out[3] = phi(z);
        out[4] = nu(z);
        out[5] = psi(z);
        out[6] = (out[2] < out[0] ? 1.0 : 0.0) + (out[5] < out[3] ? 1.0 : 0.0);
    });

    DemoRow row;
    row.n = model.n;
    row.d = model.d;
    row.coordinate = spot.coordinate;
    row.gap_bound = spot.gap_bound;
    row.size_phi = PowerEstimate::from(m[0], mc.master_seed);
    row.size_nu = PowerEstimate::from(m[1], mc.master_seed);
    row.size_psi = PowerEstimate::from(m[2], mc.master_seed);
    row.power_phi = PowerEstimate::from(m[3], mc.master_seed);
    row.power_nu = PowerEstimate::from(m[4], mc.master_seed);
    row.power_psi = PowerEstimate::from(m[5], mc.master_seed);
    row.exact_size_nu = spike_z_exact_size(model.d);
    row.exact_power_nu = spike_z_exact_power(model.d);
    row.dominance_violations = std::lround(m[6].mean * static_cast<double>(m[6].count));
    row.blind_spot_within_gap = std::abs(row.power_phi.mean.value() - row.size_phi.mean.value()) <=
                                row.gap_bound + 3.0 * (row.power_phi.se + row.size_phi.se);
    row.nu_detects_blind_spot = row.power_nu.mean.value() > row.power_phi.mean.value();
    row.size_below_one = row.size_phi.mean.value() < 1.0;
    return row;
}

inline DemoReport enhanceability_demo(const std::string& test_spec, const RegimeSpec& regime, const McConfig& mc) {
    regime.validate();
    mc.validate();
    if (!regime.d_rule.unbounded()) {
        throw DomainError("the enhanceability demo needs an unbounded dimension rule, got " + regime.d_rule.to_string());
    }
    const TestSpec spec = parse_test_spec(test_spec);
    if (required_model(spec) != "gaussian") throw SpecError("the demo runs in the Gaussian location model");

    DemoReport report;
    report.d_rule = regime.d_rule.to_string();
    report.alpha = regime.alpha;
    report.reps = mc.reps;
    report.seed = mc.master_seed;
    for (const long n : regime.n_grid) {
        const long d = regime.d_rule(n);
        const GaussianLocationModel model(n, d);
        const Model as_model(model);
        const TestFunction phi = build_test(spec, TestContext{n, d, regime.alpha, &as_model, default_calibration()});
        if (report.test.empty()) report.test = phi.name();
        report.rows.push_back(enhanceability_row(phi, model, mc));
    }
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
        const auto& prev = report.rows[k - 1];
        const auto& cur = report.rows[k];
        // The floored magnitude keeps both closed forms flat for d < e^2.
        if (cur.d == prev.d || spike_scale(prev.d) <= 1.0) continue;
        report.nu_size_decreasing = report.nu_size_decreasing && cur.exact_size_nu < prev.exact_size_nu;
        report.nu_power_increasing = report.nu_power_increasing && cur.exact_power_nu > prev.exact_power_nu;
    }
    return report;
}

} // namespace penh
