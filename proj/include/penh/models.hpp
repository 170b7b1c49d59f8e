#pragma once

// Statistical experiments reduced to a sufficient-statistic sampler, a
// parameter-space membership test and an information matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "penh/errors.hpp"
#include "penh/random.hpp"

namespace penh {

using Vector = std::vector<double>;

struct ParameterPoint {
    Vector theta;

    ParameterPoint() = default;
    explicit ParameterPoint(Vector values) : theta(std::move(values)) {
        if (theta.empty()) throw DomainError("parameter point must have dimension >= 1");
    }
    static ParameterPoint zero(std::size_t dim) { return ParameterPoint(Vector(dim, 0.0)); }

    [[nodiscard]] std::size_t dim() const { return theta.size(); }
    [[nodiscard]] double norm() const {
        double s = 0.0;
        for (double v : theta) s += v * v;
        return std::sqrt(s);
    }
};

namespace detail {

inline void require_positive(long value, const char* what) {
    if (value < 1) throw DomainError(std::string(what) + " must be >= 1");
}

} // namespace detail

/// X_i ~ N_d(theta, I_d), i = 1..n; sufficient statistic Z = n^{-1/2} sum X_i ~ N_d(sqrt(n) theta, I_d).
struct GaussianLocationModel {
    long n = 1;
    long d = 1;

    GaussianLocationModel(long n_, long d_) : n(n_), d(d_) {
        detail::require_positive(n, "sample size n");
        detail::require_positive(d, "dimension d");
    }

    [[nodiscard]] std::size_t statistic_dim() const { return static_cast<std::size_t>(d); }

    /// Writes one draw of Z. Noise is drawn coordinate by coordinate before the
    /// shift, so the first k coordinates only depend on the first k draws.
    void sample_statistic(std::span<const double> theta, RandomStream& rng, std::span<double> out) const {
        const double root_n = std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.normal() + root_n * theta[i];
    }

    /// Raw observations X_1..X_n, row-major (n x d).
    void sample_observations(std::span<const double> theta, RandomStream& rng, std::span<double> out) const {
        const auto dim = static_cast<std::size_t>(d);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = rng.normal() + theta[k % dim];
    }

    [[nodiscard]] bool contains(std::span<const double>) const { return true; }
};

/// n-fold product of N_d(theta, d^3 I_d) with theta in (-1, 1)^d; the sampler
/// draws the sample mean ~ N_d(theta, (d^3 / n) I_d) directly.
struct ScaledGaussianModel {
    long n = 1;
    long d = 1;

    ScaledGaussianModel(long n_, long d_) : n(n_), d(d_) {
        detail::require_positive(n, "sample size n");
        detail::require_positive(d, "dimension d");
    }

    [[nodiscard]] std::size_t statistic_dim() const { return static_cast<std::size_t>(d); }

    [[nodiscard]] double mean_sd() const {
        const double dd = static_cast<double>(d);
        return std::sqrt(dd * dd * dd / static_cast<double>(n));
    }

    void sample_statistic(std::span<const double> theta, RandomStream& rng, std::span<double> out) const {
        const double sd = mean_sd();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = theta[i] + sd * rng.normal();
    }

    [[nodiscard]] bool contains(std::span<const double> theta) const {
        for (double v : theta) {
            if (!(v > -1.0 && v < 1.0)) return false;
        }
        return true;
    }
};

/// y = X theta + u with u ~ N_n(0, sigma^2 I_n) and a fixed n x d design.
/// The statistic is the full response vector.
class FixedDesignRegression {
public:
    FixedDesignRegression(Eigen::MatrixXd design, double noise_sd = 1.0)
        : design_(std::move(design)), noise_sd_(noise_sd) {
        n = static_cast<long>(design_.rows());
        d = static_cast<long>(design_.cols());
        detail::require_positive(d, "dimension d");
        if (n < d) throw LinalgError("regression design needs n >= d");
        if (!(noise_sd_ > 0.0) || !std::isfinite(noise_sd_)) throw DomainError("noise_sd must be positive");
        gram_ = design_.transpose() * design_;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 1e-10 * hi) || !(hi > 0.0)) {
            std::ostringstream msg;
            msg << "rank-deficient regression design (gram eigenvalues in [" << lo << ", " << hi << "])";
            throw LinalgError(msg.str());
        }
        ols_map_ = gram_.ldlt().solve(design_.transpose());
    }

    /// Orthonormalized seeded Gaussian columns scaled so that X'X = n I.
    static FixedDesignRegression with_default_design(long n, long d, double noise_sd = 1.0,
                                                     std::uint64_t seed = 0) {
        detail::require_positive(n, "sample size n");
        detail::require_positive(d, "dimension d");
        if (n < d) throw LinalgError("regression design needs n >= d");
        RandomStream rng(seed, StreamTag::design, static_cast<std::uint64_t>(n) * 1000003ULL + d);
        Eigen::MatrixXd raw(n, d);
        for (long j = 0; j < d; ++j) {
            for (long i = 0; i < n; ++i) raw(i, j) = rng.normal();
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
        return FixedDesignRegression(q * std::sqrt(static_cast<double>(n)), noise_sd);
    }

    long n = 0;
    long d = 0;

    [[nodiscard]] std::size_t statistic_dim() const { return static_cast<std::size_t>(n); }
    [[nodiscard]] const Eigen::MatrixXd& design() const { return design_; }
    [[nodiscard]] const Eigen::MatrixXd& gram() const { return gram_; }
    /// (X'X)^{-1} X', d x n.
    [[nodiscard]] const Eigen::MatrixXd& ols_map() const { return ols_map_; }
    [[nodiscard]] double noise_sd() const { return noise_sd_; }

    void sample_statistic(std::span<const double> theta, RandomStream& rng, std::span<double> out) const {
        Eigen::Map<Eigen::VectorXd> y(out.data(), n);
        for (long i = 0; i < n; ++i) y[i] = noise_sd_ * rng.normal();
        y.noalias() += design_ * Eigen::Map<const Eigen::VectorXd>(theta.data(), d);
    }

    [[nodiscard]] bool contains(std::span<const double>) const { return true; }

private:
    Eigen::MatrixXd design_;
    double noise_sd_ = 1.0;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd ols_map_;
};

using Model = std::variant<GaussianLocationModel, ScaledGaussianModel, FixedDesignRegression>;

inline long model_n(const Model& m) {
    return std::visit([](const auto& x) { return x.n; }, m);
}
inline long model_d(const Model& m) {
    return std::visit([](const auto& x) { return x.d; }, m);
}
inline std::size_t statistic_dim(const Model& m) {
    return std::visit([](const auto& x) { return x.statistic_dim(); }, m);
}
inline std::string model_name(const Model& m) {
    switch (m.index()) {
    case 0: return "gaussian";
    case 1: return "scaled";
    default: return "regression";
    }
}

inline bool theta_membership(const Model& model, const ParameterPoint& theta) {
    if (theta.dim() != static_cast<std::size_t>(model_d(model))) {
        throw DomainError("theta has dimension " + std::to_string(theta.dim()) + ", model expects " +
                          std::to_string(model_d(model)));
    }
    return std::visit([&](const auto& x) { return x.contains(theta.theta); }, model);
}

/// Throws ParameterError naming the violated bound when theta is outside Theta_d.
inline void require_membership(const Model& model, const ParameterPoint& theta) {
    if (theta_membership(model, theta)) return;
    for (std::size_t i = 0; i < theta.dim(); ++i) {
        const double v = theta.theta[i];
        if (!(v > -1.0 && v < 1.0)) {
            std::ostringstream msg;
            msg << "theta[" << i + 1 << "] = " << v << " violates the open bound |theta_i| < 1 of (-1,1)^d";
            throw ParameterError(msg.str());
        }
    }
    throw ParameterError("theta outside the parameter space");
}

inline Vector sufficient_statistic_sample(const Model& model, const ParameterPoint& theta, RandomStream& rng) {
    require_membership(model, theta);
    Vector out(statistic_dim(model));
    std::visit([&](const auto& x) { x.sample_statistic(theta.theta, rng, out); }, model);
    return out;
}

inline Eigen::MatrixXd information_matrix(const Model& model) {
    struct Visitor {
        Eigen::MatrixXd operator()(const GaussianLocationModel& m) const {
            return Eigen::MatrixXd::Identity(m.d, m.d);
        }
        Eigen::MatrixXd operator()(const ScaledGaussianModel& m) const {
            const double dd = static_cast<double>(m.d);
            return Eigen::MatrixXd::Identity(m.d, m.d) / (dd * dd * dd);
        }
        Eigen::MatrixXd operator()(const FixedDesignRegression& m) const {
            return m.gram() / (static_cast<double>(m.n) * m.noise_sd() * m.noise_sd());
        }
    };
    return std::visit(Visitor{}, model);
}

inline Vector ols_estimate(const FixedDesignRegression& model, std::span<const double> y) {
    if (y.size() != static_cast<std::size_t>(model.n)) throw DomainError("ols_estimate: response length != n");
    Vector out(static_cast<std::size_t>(model.d));
    Eigen::Map<Eigen::VectorXd>(out.data(), model.d).noalias() =
        model.ols_map() * Eigen::Map<const Eigen::VectorXd>(y.data(), model.n);
    return out;
}

/// Central sequence at theta = 0: n^{-1/2} X'y / sigma^2.
inline Vector regression_central_sequence(const FixedDesignRegression& model, std::span<const double> y) {
    if (y.size() != static_cast<std::size_t>(model.n)) {
        throw DomainError("regression_central_sequence: response length != n");
    }
    const double scale = 1.0 / (std::sqrt(static_cast<double>(model.n)) * model.noise_sd() * model.noise_sd());
    Vector out(static_cast<std::size_t>(model.d));
    Eigen::Map<Eigen::VectorXd>(out.data(), model.d).noalias() =
        scale * (model.design().transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), model.n));
    return out;
}

/// theta = magnitude * e_coordinate with magnitude = max(sqrt(log d / 2), 1) / sqrt(n).
struct SpikeAlternative {
    long coordinate = 1; // 1-based
    double magnitude = 0.0;
    long n = 1;
    long d = 1;

    [[nodiscard]] ParameterPoint theta() const {
        Vector v(static_cast<std::size_t>(d), 0.0);
        v[static_cast<std::size_t>(coordinate - 1)] = magnitude;
        return ParameterPoint(std::move(v));
    }
};

/// sqrt(n) times the spike magnitude: max(sqrt(log d / 2), 1).
inline double spike_scale(long d) {
    detail::require_positive(d, "dimension d");
    return std::max(std::sqrt(0.5 * std::log(static_cast<double>(d))), 1.0);
}

inline SpikeAlternative spike_alternative(long n, long d, long coordinate) {
    detail::require_positive(n, "sample size n");
    detail::require_positive(d, "dimension d");
    if (coordinate < 1 || coordinate > d) {
        throw DomainError("spike coordinate " + std::to_string(coordinate) + " outside [1, " + std::to_string(d) + "]");
    }
    return SpikeAlternative{coordinate, spike_scale(d) / std::sqrt(static_cast<double>(n)), n, d};
}

inline ParameterPoint embed(const ParameterPoint& theta, long d2) {
    if (d2 <= static_cast<long>(theta.dim())) {
        throw DomainError("embed: target dimension must exceed " + std::to_string(theta.dim()));
    }
    Vector v = theta.theta;
    v.resize(static_cast<std::size_t>(d2), 0.0);
    return ParameterPoint(std::move(v));
}

} // namespace penh
