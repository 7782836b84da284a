#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "robustmct/mmm.hpp"

using namespace robustmct;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// two endpoints measured on the same subjects with correlated noise
std::pair<GroupedSample, GroupedSample> bivariate_sample(const std::vector<int>& sizes,
                                                         const std::vector<double>& shifts1,
                                                         const std::vector<double>& shifts2,
                                                         double rho, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Group> g1, g2;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        VectorXd y1(sizes[g]), y2(sizes[g]);
        for (int i = 0; i < sizes[g]; ++i) {
            const double z1 = normal(rng), z2 = normal(rng);
            y1(i) = shifts1[g] + z1;
            y2(i) = shifts2[g] + rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
        }
        const std::string label = "g" + std::to_string(g);
        g1.push_back({label, std::move(y1), std::nullopt});
        g2.push_back({label, std::move(y2), std::nullopt});
    }
    return {GroupedSample(g1), GroupedSample(g2)};
}

int kk(const StackedFit& s) { return static_cast<int>(s.shift_estimates.size()); }

MatrixXd shift_correlation(const StackedFit& s) {
    const int n = kk(s);
    MatrixXd corr(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            corr(i, j) = s.shift_covariance(i, j) /
                         std::sqrt(s.shift_covariance(i, i) * s.shift_covariance(j, j));
    return corr;
}

} // namespace

TEST_CASE("marginal Wald statistics are preserved exactly in the stack") {
    auto [s1, s2] = bivariate_sample({20, 20, 20}, {0, .5, 1}, {0, .2, .8}, 0.6, 1);
    const auto m1 = fit_mlt(s1);
    const auto m2 = fit_mlt(s2);
    const auto stacked = stack_models({m1, m2});
    const int k = 2;
    // diagonal blocks equal the marginal observed-information blocks exactly
    const int m1off = m1.basis.order() + 1, m2off = m2.basis.order() + 1;
    CHECK((stacked.shift_covariance.topLeftCorner(k, k) -
           m1.covariance.block(m1off, m1off, k, k)).norm() < 1e-8);
    CHECK((stacked.shift_covariance.bottomRightCorner(k, k) -
           m2.covariance.block(m2off, m2off, k, k)).norm() < 1e-8);
    for (int j = 0; j < k; ++j) {
        CHECK(stacked.shift_estimates(j) == doctest::Approx(m1.beta(j)).epsilon(1e-12));
        CHECK(stacked.shift_estimates(k + j) == doctest::Approx(m2.beta(j)).epsilon(1e-12));
    }
    CHECK(stacked.subjects == 60);
    CHECK(stacked.joint_df == doctest::Approx(m1.model_df));
}

TEST_CASE("independent endpoints produce near-zero cross correlations") {
    double max_cross = 0.0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        auto [s1, s2] = bivariate_sample({30, 30, 30}, {0, 0, 0}, {0, 0, 0}, 0.0, seed);
        const auto stacked = stack_models({fit_mlt(s1), fit_mlt(s2)});
        const MatrixXd corr = shift_correlation(stacked);
        max_cross = std::max(max_cross, corr.topRightCorner(2, 2).cwiseAbs().maxCoeff());
    }
    CHECK(max_cross < 0.35);  // sampling noise only
}

TEST_CASE("stacking a model with itself gives cross correlation one") {
    auto sample = oracles::normal_sample({25, 25, 25}, {0, .4, .9}, {1, 1, 1}, 21);
    const auto model = fit_mlt(sample);
    const auto stacked = stack_models({model, model});
    const MatrixXd corr = shift_correlation(stacked);
    for (int j = 0; j < 2; ++j) CHECK(corr(j, 2 + j) == doctest::Approx(1.0).epsilon(1e-6));

    // joint inference over a duplicated endpoint costs nothing extra: the
    // adjusted p-values match the univariate ones at the same df
    const auto joint = mmm_dunnett(stacked);
    const auto uni = mlt_dunnett(model, stacked.joint_df);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(joint.p_adjusted(j) - uni.p_adjusted(j)) < 1e-3);
        CHECK(std::abs(joint.p_adjusted(2 + j) - uni.p_adjusted(j)) < 1e-3);
    }
}

TEST_CASE("highly correlated endpoints have strong cross correlations") {
    auto [s1, s2] = bivariate_sample({40, 40, 40}, {0, .5, 1}, {0, .5, 1}, 0.9, 31);
    const auto stacked = stack_models({fit_mlt(s1), fit_mlt(s2)});
    const MatrixXd corr = shift_correlation(stacked);
    CHECK(corr(0, 2) > 0.5);
    CHECK(corr(1, 3) > 0.5);
}

TEST_CASE("joint adjusted p-values are never smaller than the univariate ones") {
    auto [s1, s2] = bivariate_sample({20, 20, 20, 20}, {0, .3, .7, 1.1}, {0, .1, .5, .9}, 0.4, 41);
    const auto m1 = fit_mlt(s1);
    const auto m2 = fit_mlt(s2);
    const auto joint = mmm_dunnett(stack_models({m1, m2}));
    const auto u1 = mlt_dunnett(m1, std::nullopt);
    const auto u2 = mlt_dunnett(m2, std::nullopt);
    for (int j = 0; j < 3; ++j) {
        CHECK(joint.p_adjusted(j) >= u1.p_adjusted(j) - 1e-6);
        CHECK(joint.p_adjusted(3 + j) >= u2.p_adjusted(j) - 1e-6);
    }
    // and the joint estimates are exactly the marginal ones
    for (int j = 0; j < 3; ++j) {
        CHECK(joint.estimates(j) == doctest::Approx(m1.beta(j)).epsilon(1e-12));
        CHECK(joint.estimates(3 + j) == doctest::Approx(m2.beta(j)).epsilon(1e-12));
    }
}

TEST_CASE("labels combine endpoint and comparison names") {
    auto [s1, s2] = bivariate_sample({15, 15}, {0, .5}, {0, .5}, 0.3, 51);
    const auto stacked = stack_models({fit_mlt(s1), fit_mlt(s2)}, {"creatinine", "alt"},
                                      {"high vs control"});
    REQUIRE(stacked.labels.size() == 2);
    CHECK(stacked.labels[0] == "creatinine: high vs control");
    CHECK(stacked.labels[1] == "alt: high vs control");
}

TEST_CASE("mismatched samples are rejected") {
    auto [s1, s2] = bivariate_sample({15, 15}, {0, .5}, {0, .5}, 0.3, 61);
    auto other = oracles::normal_sample({10, 10}, {0, 0}, {1, 1}, 62);
    CHECK_THROWS_AS(stack_models({fit_mlt(s1), fit_mlt(other)}), invalid_design_error);
    CHECK_THROWS_AS(stack_models({}), invalid_design_error);
}

TEST_CASE("shift covariance is symmetric positive semidefinite") {
    for (std::uint64_t seed : {71u, 72u, 73u}) {
        auto [s1, s2] = bivariate_sample({12, 12, 12, 12}, {0, .2, .4, .8},
                                         {0, .3, .6, 1.0}, 0.7, seed);
        const auto stacked = stack_models({fit_mlt(s1), fit_mlt(s2)});
        const MatrixXd& v = stacked.shift_covariance;
        CHECK((v - v.transpose()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(v);
        CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
    }
}
