#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "penh/diagnostics.hpp"
#include "penh/models.hpp"
#include "penh/stats_core.hpp"

using namespace penh;

namespace {

constexpr long kDraws = 100000;

/// Per-coordinate sample means and variances of `draws` statistics.
struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> var;
};

ColumnStats column_stats(const Model& model, const ParameterPoint& theta, long draws, std::uint64_t seed) {
    const std::size_t dim = statistic_dim(model);
    ColumnStats out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    std::vector<double> sq(dim, 0.0);
    for (long r = 0; r < draws; ++r) {
        RandomStream rng(seed, StreamTag::sampling_check, static_cast<std::uint64_t>(r));
        const Vector z = sufficient_statistic_sample(model, theta, rng);
        for (std::size_t i = 0; i < dim; ++i) {
            out.mean[i] += z[i];
            sq[i] += z[i] * z[i];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        out.mean[i] /= static_cast<double>(draws);
        out.var[i] = sq[i] / static_cast<double>(draws) - out.mean[i] * out.mean[i];
    }
    return out;
}

} // namespace

TEST(GaussianLocation, StatisticMeanIsRootNTheta) {
    const Model model = GaussianLocationModel(4, 2);
    const double tol = 3.0 / std::sqrt(static_cast<double>(kDraws));
    const auto null = column_stats(model, ParameterPoint::zero(2), kDraws, 1);
    EXPECT_NEAR(null.mean[0], 0.0, tol);
    EXPECT_NEAR(null.mean[1], 0.0, tol);
    const auto alt = column_stats(model, ParameterPoint({1.0, 0.0}), kDraws, 2);
    EXPECT_NEAR(alt.mean[0], 2.0, tol);
    EXPECT_NEAR(alt.mean[1], 0.0, tol);
    EXPECT_NEAR(alt.var[0], 1.0, 0.05);
}

TEST(GaussianLocation, KolmogorovSmirnovSufficiencyCheck) {
    const long n = 50;
    const long d = 3;
    const Model model = GaussianLocationModel(n, d);
    for (const ParameterPoint& theta : {ParameterPoint::zero(3), spike_alternative(n, d, 2).theta()}) {
        std::vector<std::vector<double>> cols(3, std::vector<double>(kDraws));
        for (long r = 0; r < kDraws; ++r) {
            RandomStream rng(5, StreamTag::sampling_check, static_cast<std::uint64_t>(r));
            const Vector z = sufficient_statistic_sample(model, theta, rng);
            for (std::size_t i = 0; i < 3; ++i) cols[i][static_cast<std::size_t>(r)] = z[i];
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const double mu = std::sqrt(static_cast<double>(n)) * theta.theta[i];
            const auto ks = ks_one_sample(cols[i], [mu](double x) { return stats::std_normal_cdf(x - mu).value(); });
            EXPECT_GT(ks.p_value, kKsLevel) << "coordinate " << i + 1;
        }
    }
}

TEST(ScaledGaussian, VarianceIsDCubedOverN) {
    const Model model = ScaledGaussianModel(100, 4);
    const auto stats = column_stats(model, ParameterPoint::zero(4), kDraws, 3);
    for (double v : stats.var) EXPECT_NEAR(v, 0.64, 0.05 * 0.64);
}

TEST(ScaledGaussian, MembershipIsTheOpenCube) {
    const Model scaled = ScaledGaussianModel(10, 2);
    EXPECT_TRUE(theta_membership(scaled, ParameterPoint({0.5, -0.5})));
    EXPECT_FALSE(theta_membership(scaled, ParameterPoint({1.0, 0.0})));
    EXPECT_FALSE(theta_membership(scaled, ParameterPoint({0.0, -1.0})));
    const Model gauss = GaussianLocationModel(10, 2);
    EXPECT_TRUE(theta_membership(gauss, ParameterPoint({1e6, -1e6})));
    EXPECT_THROW(theta_membership(gauss, ParameterPoint({1.0})), DomainError);

    RandomStream rng(0, StreamTag::sampling_check, 0);
    try {
        sufficient_statistic_sample(scaled, ParameterPoint({0.0, 1.5}), rng);
        FAIL() << "expected a parameter error";
    } catch (const ParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("(-1,1)^d"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("theta[2]"), std::string::npos);
    }
}

TEST(InformationMatrix, ClosedForms) {
    EXPECT_TRUE(information_matrix(GaussianLocationModel(7, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
    EXPECT_TRUE(information_matrix(ScaledGaussianModel(7, 2)).isApprox(Eigen::MatrixXd::Identity(2, 2) / 8.0));
    const Model reg = FixedDesignRegression::with_default_design(40, 3);
    EXPECT_LT((information_matrix(reg) - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpikeAlternative, MagnitudeUsesTheFlooredScale) {
    EXPECT_NEAR(spike_alternative(100, 100, 1).magnitude, std::sqrt(std::log(100.0) / 200.0), 1e-15);
    EXPECT_NEAR(spike_alternative(100, 100, 1).magnitude, 0.1517427, 1e-7);
    EXPECT_DOUBLE_EQ(spike_alternative(100, 1, 1).magnitude, 0.1);
    EXPECT_DOUBLE_EQ(spike_alternative(100, 2, 2).magnitude, 0.1);
    for (long i = 1; i <= 50; ++i) {
        EXPECT_EQ(spike_alternative(30, 50, i).magnitude, spike_alternative(30, 50, 1).magnitude);
    }
    const ParameterPoint t = spike_alternative(9, 5, 4).theta();
    EXPECT_EQ(t.dim(), 5u);
    EXPECT_GT(t.theta[3], 0.0);
    EXPECT_EQ(t.theta[0], 0.0);
    EXPECT_THROW(spike_alternative(10, 5, 0), DomainError);
    EXPECT_THROW(spike_alternative(10, 5, 6), DomainError);
}

TEST(Embed, PadsWithZeros) {
    const ParameterPoint e = embed(ParameterPoint({1.0, 2.0}), 4);
    EXPECT_EQ(e.theta, (Vector{1.0, 2.0, 0.0, 0.0}));
    EXPECT_EQ(embed(ParameterPoint::zero(2), 5).theta, Vector(5, 0.0));
    const ParameterPoint t({0.3, -1.2, 4.0});
    EXPECT_DOUBLE_EQ(embed(t, 9).norm(), t.norm());
    EXPECT_THROW(embed(t, 3), DomainError);
    EXPECT_THROW(embed(t, 2), DomainError);
}

TEST(Regression, DefaultDesignIsOrthonormalScaled) {
    const auto reg = FixedDesignRegression::with_default_design(60, 5);
    EXPECT_LT((reg.gram() - 60.0 * Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(reg.statistic_dim(), 60u);
    EXPECT_THROW(FixedDesignRegression::with_default_design(3, 5), LinalgError);
}

TEST(Regression, RejectsRankDeficientDesign) {
    Eigen::MatrixXd x(6, 2);
    x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
    EXPECT_THROW(FixedDesignRegression{x}, LinalgError);
}

TEST(Regression, OlsRecoversNoiselessTheta) {
    Eigen::MatrixXd x(8, 3);
    x << 1, 0.5, -1, 2, 1, 0, 0, 3, 1, -1, 2, 2, 1, 1, 1, 0.5, -2, 3, 4, 0, -1, 2, 2, 2;
    const FixedDesignRegression reg(x);
    const Eigen::Vector3d theta(0.7, -1.3, 2.1);
    const Eigen::VectorXd y = x * theta;
    const Vector est = ols_estimate(reg, std::span<const double>(y.data(), 8));
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(est[j], theta[j], 1e-10);
}

TEST(Regression, OlsClosedFormUnderOrthonormalDesign) {
    const auto reg = FixedDesignRegression::with_default_design(20, 4);
    RandomStream rng(11, StreamTag::sampling_check, 0);
    Vector y(20);
    for (double& v : y) v = 3.0 * rng.normal();
    const Vector est = ols_estimate(reg, y);
    const Eigen::VectorXd expected = reg.design().transpose() * Eigen::Map<const Eigen::VectorXd>(y.data(), 20) / 20.0;
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(est[j], expected[j], 1e-12);
}

TEST(Regression, OlsVarianceMatchesGaussMarkov) {
    Eigen::MatrixXd x(30, 3);
    RandomStream design_rng(3, StreamTag::design, 0);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 3; ++j) x(i, j) = design_rng.normal() + (j == 1 ? 0.5 * x(i, 0) : 0.0);
    }
    const double sigma = 1.7;
    const FixedDesignRegression reg(x, sigma);
    const Model model(reg);
    std::vector<double> sum(3, 0.0), sq(3, 0.0);
    for (long r = 0; r < kDraws; ++r) {
        RandomStream rng(4, StreamTag::sampling_check, static_cast<std::uint64_t>(r));
        const Vector y = sufficient_statistic_sample(model, ParameterPoint::zero(3), rng);
        const Vector est = ols_estimate(reg, y);
        for (int j = 0; j < 3; ++j) {
            sum[j] += est[j];
            sq[j] += est[j] * est[j];
        }
    }
    const Eigen::MatrixXd cov = sigma * sigma * reg.gram().inverse();
    for (int j = 0; j < 3; ++j) {
        const double m = sum[j] / kDraws;
        EXPECT_NEAR(sq[j] / kDraws - m * m, cov(j, j), 0.05 * cov(j, j));
    }
}

TEST(Regression, CentralSequenceMoments) {
    const long n = 40;
    const long d = 3;
    const auto reg = FixedDesignRegression::with_default_design(n, d);
    const Model model(reg);
    EXPECT_EQ(regression_central_sequence(reg, Vector(n, 0.0)), Vector(d, 0.0));

    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (long r = 0; r < kDraws; ++r) {
        RandomStream rng(6, StreamTag::sampling_check, static_cast<std::uint64_t>(r));
        const Vector y = sufficient_statistic_sample(model, ParameterPoint::zero(d), rng);
        const Vector z = regression_central_sequence(reg, y);
        const Eigen::Map<const Eigen::VectorXd> zv(z.data(), d);
        second += zv * zv.transpose();
    }
    second /= static_cast<double>(kDraws);
    for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) EXPECT_NEAR(second(i, j), i == j ? 1.0 : 0.0, 0.05);
    }

    const Vector h{1.0, -0.5, 2.0};
    Vector theta(h);
    for (double& v : theta) v /= std::sqrt(static_cast<double>(n));
    std::vector<double> mean(d, 0.0);
    const long reps = 20000;
    for (long r = 0; r < reps; ++r) {
        RandomStream rng(8, StreamTag::sampling_check, static_cast<std::uint64_t>(r));
        const Vector y = sufficient_statistic_sample(model, ParameterPoint(theta), rng);
        const Vector z = regression_central_sequence(reg, y);
        for (long j = 0; j < d; ++j) mean[j] += z[j] / reps;
    }
    for (long j = 0; j < d; ++j) EXPECT_NEAR(mean[j], h[j], 3.0 / std::sqrt(static_cast<double>(reps)));
}
