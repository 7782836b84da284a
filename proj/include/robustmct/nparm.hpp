#pragma once

#include "robustmct/contrast.hpp"
#include "robustmct/types.hpp"

namespace robustmct {

/// Brunner-Munzel relative effects of each treatment against the control.
struct RelEffects {
    VectorXd p_hat;          // P(X0 < Xi) + 0.5 P(X0 = Xi)
    VectorXd variance;       // variance of p_hat
    VectorXd df;             // Welch-type per contrast
    MatrixXd covariance;     // shared-control placement covariance
    std::vector<bool> boundary;  // continuity-corrected at 0 or 1
};

enum class EffectScale { Probit, Logit, Identity };

/// Relative effects with mid-rank tie handling and placement variances.
RelEffects relative_effects(const GroupedSample& sample);

/// Dunnett-type nonparametric multiple contrast test on the chosen scale;
/// simultaneous intervals are back-transformed to [0, 1].
MaxTResult npar_dunnett(const GroupedSample& sample, Tail tail = Tail::TwoSided,
                        double alpha = 0.05, EffectScale scale = EffectScale::Probit,
                        const MvtOptions& opts = {});

} // namespace robustmct
