#pragma once

#include "robustmct/mlt.hpp"

namespace robustmct {

/// Joint inference over transformation models fitted to different endpoints
/// of the same subjects.
struct StackedFit {
    std::vector<TransformationModel> models;
    int subjects = 0;
    double joint_df = 0.0;  // mean of per-model dfs
    /// covariance of all shift parameters across models: the stacked-score
    /// sandwich, congruence-transformed blockwise so each diagonal block
    /// equals its marginal observed-information covariance exactly (PSD by
    /// construction, marginal Wald statistics identical to standalone fits)
    MatrixXd shift_covariance;
    VectorXd shift_estimates;
    std::vector<std::string> labels;
};

StackedFit stack_models(const std::vector<TransformationModel>& models,
                        const std::vector<std::string>& endpoint_names = {},
                        const std::vector<std::string>& comparison_labels = {});

/// Max-t test over all (endpoint x dose) shift hypotheses.
MaxTResult mmm_dunnett(const StackedFit& stacked, Tail tail = Tail::TwoSided,
                       double alpha = 0.05, const MvtOptions& opts = {});

} // namespace robustmct
