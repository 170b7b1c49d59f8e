#pragma once

#include <string>
#include <variant>

#include "penh/errors.hpp"
#include "penh/hypothesis_tests.hpp"
#include "penh/mc.hpp"
#include "penh/models.hpp"

namespace penh {

/// Monte Carlo estimate of E_theta[test]: the mean rejection value over
/// mc.reps independent draws of the input the test consumes.
inline PowerEstimate estimate_rejection_prob(const TestFunction& test, const Model& model, const ParameterPoint& theta,
                                             const McConfig& mc, StreamTag tag = StreamTag::rejection) {
    require_membership(model, theta);
    if (test.input_kind() == InputKind::observations) {
        const auto* gauss = std::get_if<GaussianLocationModel>(&model);
        if (!gauss) throw DomainError("test '" + test.name() + "' consumes raw Gaussian location observations");
        const auto len = static_cast<std::size_t>(gauss->n * gauss->d);
        if (test.input_dim() != len) throw DomainError("test '" + test.name() + "' built for a different (n, d)");
        const auto moments = replicate(mc, tag, 1, [&](long, RandomStream& rng, Scratch& s, std::span<double> out) {
            s.a.resize(len);
            gauss->sample_observations(theta.theta, rng, s.a);
            out[0] = test(s.a);
        });
        return PowerEstimate::from(moments[0], mc.master_seed);
    }

    const std::size_t len = statistic_dim(model);
    if (test.input_dim() != len) {
        throw DomainError("test '" + test.name() + "' expects a statistic of length " +
                          std::to_string(test.input_dim()) + ", model produces " + std::to_string(len));
    }
    const auto moments = replicate(mc, tag, 1, [&](long, RandomStream& rng, Scratch& s, std::span<double> out) {
        s.a.resize(len);
        std::visit([&](const auto& m) { m.sample_statistic(theta.theta, rng, s.a); }, model);
        out[0] = test(s.a);
    });
    return PowerEstimate::from(moments[0], mc.master_seed);
}

} // namespace penh
