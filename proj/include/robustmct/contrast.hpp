#pragma once

#include <variant>

#include "robustmct/mvt.hpp"
#include "robustmct/types.hpp"
#include "robustmct/variance.hpp"

namespace robustmct {

struct PooledMethod {};
struct SatterthwaiteMethod {};
struct SandwichMethod {
    double df = std::numeric_limits<double>::infinity();
};
/// Supplied covariance of the contrast estimates plus the df to use; lets the
/// robust, mlt and mmm backends reuse the max-t machinery.
struct ExternalCovariance {
    MatrixXd contrast_covariance;
    double df = std::numeric_limits<double>::infinity();
    VectorXd df_per_contrast;  // optional, reporting only
};

using VarianceMethod =
    std::variant<PooledMethod, SatterthwaiteMethod, SandwichMethod, ExternalCovariance>;

/// Multiplicity-adjusted p-values under the joint multivariate t(df, corr):
/// p_j = P(max component exceeds |t_j|) for the two-sided case.
VectorXd adjusted_pvalues(const VectorXd& tstats, const CorrelationMatrix& corr, double df,
                          Tail tail, const MvtOptions& opts = {});

/// Max-t multiple contrast test with simultaneous confidence intervals.
MaxTResult max_t_test(const GroupedSample& sample, const ContrastMatrix& contrasts,
                      const VarianceMethod& method, Tail tail = Tail::TwoSided,
                      double alpha = 0.05, const MvtOptions& opts = {});

/// Max-t inference from precomputed estimates and their covariance.
MaxTResult max_t_from_estimates(const VectorXd& estimates, const MatrixXd& covariance,
                                double df, const std::vector<std::string>& labels, Tail tail,
                                double alpha, const MvtOptions& opts = {});

} // namespace robustmct
