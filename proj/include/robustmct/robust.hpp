#pragma once

#include "robustmct/contrast.hpp"
#include "robustmct/types.hpp"

namespace robustmct {

enum class PsiFunction { Huber, Bisquare };

struct MEstimateOptions {
    PsiFunction psi = PsiFunction::Huber;
    double tuning = 0.0;  // 0: default per psi (Huber 1.345, bisquare 4.685)
    int max_iter = 200;
    double tol = 1e-9;
};

/// One-way layout M-fit: coefficient 0 is the control level, coefficients
/// 1..k are shifts of the treated groups against it.
struct MFit {
    VectorXd coefficients;
    double scale = 0.0;  // normalized MAD of the initial residuals
    MatrixXd covariance;
    int iterations = 0;
    bool converged = false;
};

/// IRLS M-estimation with the scale fixed at the MAD of median-centered
/// residuals; covariance via the standard asymptotic formula with an
/// N/(N-k-1) small-sample inflation.
MFit m_estimate_oneway(const GroupedSample& sample, const MEstimateOptions& opts = {});

/// Dunnett-type max-t test on the robust shift estimates, df = N - (k+1).
MaxTResult robust_dunnett(const GroupedSample& sample, const MEstimateOptions& opts = {},
                          Tail tail = Tail::TwoSided, double alpha = 0.05,
                          const MvtOptions& mvt_opts = {});

} // namespace robustmct
