#pragma once

// Numeric kernel: normal and chi-square distribution functions, the
// noncentral chi-square Poisson mixture, Gaussian total variation and a
// log-domain sum. Everything here is a pure function.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "penh/errors.hpp"

namespace penh::stats {

/// A probability; construction checks 0 <= value <= 1.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw DomainError("probability out of [0,1]: " + std::to_string(value));
        }
    }

    /// Rounding guard for arithmetic results that may stray just outside [0,1].
    static Probability clamped(double value) {
        if (std::isnan(value)) throw DomainError("probability is NaN");
        return Probability(std::clamp(value, 0.0, 1.0));
    }

    [[nodiscard]] constexpr double value() const { return value_; }
    constexpr operator double() const { return value_; }

private:
    double value_ = 0.0;
};

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite input");
}

inline void require_open_unit(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(what) + ": p must lie in (0,1), got " + std::to_string(p));
    }
}

inline void require_dof(int dof) {
    if (dof < 1) throw DomainError("chi-square degrees of freedom must be >= 1");
}

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace detail

inline Probability std_normal_cdf(double x) {
    detail::require_finite(x, "std_normal_cdf");
    return Probability::clamped(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

inline double std_normal_quantile(double p) {
    detail::require_open_unit(p, "std_normal_quantile");
    double x = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
    // Newton polish; the pdf is bounded away from 0 except in the far tails
    // where erfc_inv is already at full precision.
    for (int iter = 0; iter < 3; ++iter) {
        const double pdf = detail::std_normal_pdf(x);
        if (pdf < 1e-300) break;
        const double step = (std_normal_cdf(x).value() - p) / pdf;
        x -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

/// Lower regularized incomplete gamma P(dof/2, x/2); zero for x <= 0.
inline Probability chi2_cdf(int dof, double x) {
    detail::require_dof(dof);
    if (std::isnan(x)) throw DomainError("chi2_cdf: NaN argument");
    if (x <= 0.0) return Probability(0.0);
    if (std::isinf(x)) return Probability(1.0);
    return Probability::clamped(boost::math::gamma_p(0.5 * dof, 0.5 * x));
}

inline double chi2_quantile(int dof, double p) {
    detail::require_dof(dof);
    detail::require_open_unit(p, "chi2_quantile");
    const double a = 0.5 * dof;
    double x = 2.0 * boost::math::gamma_p_inv(a, p);
    for (int iter = 0; iter < 4; ++iter) {
        const double pdf = 0.5 * boost::math::gamma_p_derivative(a, 0.5 * x);
        if (!(pdf > 1e-300)) break;
        const double residual = chi2_cdf(dof, x).value() - p;
        const double next = x - residual / pdf;
        if (!(next > 0.0)) break;
        const double moved = std::abs(next - x);
        x = next;
        if (moved < 1e-15 * x) break;
    }
    return x;
}

/// Noncentral chi-square CDF as a Poisson(noncentrality/2) mixture of central
/// chi-square CDFs. Summation starts at the modal Poisson index and walks
/// outwards until the Poisson mass left on each side is below 0.5e-12.
inline Probability noncentral_chi2_cdf(int dof, double noncentrality, double x) {
    detail::require_dof(dof);
    if (!(noncentrality >= 0.0) || std::isinf(noncentrality)) {
        throw DomainError("noncentral_chi2_cdf: noncentrality must be finite and >= 0");
    }
    if (std::isnan(x)) throw DomainError("noncentral_chi2_cdf: NaN argument");
    if (x <= 0.0) return Probability(0.0);
    if (noncentrality == 0.0) return chi2_cdf(dof, x);
    if (std::isinf(x)) return Probability(1.0);

    constexpr double side_tail = 0.5e-12;
    const double mu = 0.5 * noncentrality;
    const auto log_weight = [mu](double k) {
        return -mu + k * std::log(mu) - std::lgamma(k + 1.0);
    };
    const long mode = static_cast<long>(std::floor(mu));

    double total = 0.0;
    // Downward from the mode: P(K < k) <= w_k * k / (mu - k) for k < mu.
    for (long k = mode; k >= 0; --k) {
        const double w = std::exp(log_weight(static_cast<double>(k)));
        total += w * chi2_cdf(dof + 2 * static_cast<int>(k), x).value();
        if (k == 0) break;
        const double kd = static_cast<double>(k);
        if (kd < mu && w * kd / (mu - kd) < side_tail) break;
    }
    // Upward: P(K > k) <= w_k * mu / (k + 1 - mu) for k + 1 > mu.
    for (long k = mode + 1;; ++k) {
        const double w = std::exp(log_weight(static_cast<double>(k)));
        total += w * chi2_cdf(dof + 2 * static_cast<int>(k), x).value();
        const double kd = static_cast<double>(k);
        if (kd + 1.0 > mu && w * mu / (kd + 1.0 - mu) < side_tail) break;
    }
    return Probability::clamped(total);
}

/// Total variation distance between N(a, I) and N(b, I) with ||a - b||_2 = shift.
inline Probability gaussian_tv(double mean_shift_norm) {
    if (!(mean_shift_norm >= 0.0)) throw DomainError("gaussian_tv: shift must be >= 0");
    if (std::isinf(mean_shift_norm)) return Probability(1.0);
    // 2 Phi(s/2) - 1 == erf(s / (2 sqrt 2)), without the cancellation near 0.
    return Probability::clamped(std::erf(mean_shift_norm / (2.0 * std::numbers::sqrt2)));
}

inline double log_sum_exp(std::span<const double> values) {
    if (values.empty()) throw DomainError("log_sum_exp: empty input");
    if (values.size() == 1) return values.front();
    const double top = *std::max_element(values.begin(), values.end());
    if (std::isinf(top)) return top;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - top);
    return top + std::log(acc);
}

} // namespace penh::stats
