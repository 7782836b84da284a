// Test-only reference implementations, independent of the library's
// computation paths.
#pragma once

#include <Eigen/Dense>
#include <random>

#include "robustmct/types.hpp"

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct McEstimate {
    double value;
    double std_error;
};

// plain Monte Carlo estimate of P(lower <= T <= upper), T ~ mvt(df, corr)
inline McEstimate mvt_mc_prob(const VectorXd& lower, const VectorXd& upper,
                              const MatrixXd& corr, double df, std::size_t draws,
                              std::uint64_t seed) {
    const int q = static_cast<int>(corr.rows());
    Eigen::LLT<MatrixXd> llt(corr);
    MatrixXd chol = llt.matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::size_t hits = 0;
    VectorXd z(q);
    const bool finite_df = std::isfinite(df);
    std::gamma_distribution<double> gamma(df / 2.0, 2.0);
    for (std::size_t n = 0; n < draws; ++n) {
        for (int i = 0; i < q; ++i) z(i) = normal(rng);
        VectorXd x = chol * z;
        if (finite_df) x /= std::sqrt(gamma(rng) / df);
        bool inside = true;
        for (int i = 0; i < q && inside; ++i)
            inside = x(i) >= lower(i) && x(i) <= upper(i);
        if (inside) ++hits;
    }
    const double p = static_cast<double>(hits) / draws;
    return {p, std::sqrt(p * (1.0 - p) / draws)};
}

// seeded one-way normal sample
inline robustmct::GroupedSample normal_sample(const std::vector<int>& sizes,
                                              const std::vector<double>& means,
                                              const std::vector<double>& sds,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<robustmct::Group> groups;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        VectorXd y(sizes[g]);
        for (int i = 0; i < sizes[g]; ++i) y(i) = means[g] + sds[g] * normal(rng);
        groups.push_back({"g" + std::to_string(g), std::move(y), std::nullopt});
    }
    return robustmct::GroupedSample(std::move(groups));
}

} // namespace oracles
