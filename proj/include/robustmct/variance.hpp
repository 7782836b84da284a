#pragma once

#include "robustmct/mvt.hpp"
#include "robustmct/types.hpp"

namespace robustmct {

/// Per-group summary used by the heteroscedastic backends.
struct HeteroSummary {
    VectorXd means;
    VectorXd variances;
    std::vector<int> sizes;

    static HeteroSummary from_sample(const GroupedSample& sample);
};

struct PooledVariance {
    double s2;
    double df;
};

/// Classical pooled variance with df = sum(n_i - 1).
PooledVariance pooled_variance(const GroupedSample& sample);

struct SatterthwaiteResult {
    VectorXd df;  // per contrast
    CorrelationMatrix correlation;
    VectorXd contrast_variances;
};

/// Plug-in Welch/Satterthwaite df and group-variance-dependent correlation.
SatterthwaiteResult satterthwaite(const HeteroSummary& summary, const ContrastMatrix& contrasts);

struct SandwichResult {
    MatrixXd contrast_covariance;
    CorrelationMatrix correlation;
    double df;  // infinity: asymptotic normal quantiles
};

/// HC3 heteroscedasticity-consistent covariance of the group means, reduced
/// to the contrast scale. In the one-way layout leverage is 1/n_i, so the
/// HC3 variance of mean_i collapses to s_i^2 / (n_i - 1).
SandwichResult sandwich_covariance(const GroupedSample& sample, const ContrastMatrix& contrasts,
                                   double df = std::numeric_limits<double>::infinity());

} // namespace robustmct
