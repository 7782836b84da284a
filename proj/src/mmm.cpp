#include "robustmct/mmm.hpp"

#include <cmath>

namespace robustmct {

StackedFit stack_models(const std::vector<TransformationModel>& models,
                        const std::vector<std::string>& endpoint_names,
                        const std::vector<std::string>& comparison_labels) {
    const int m = static_cast<int>(models.size());
    if (m < 2) throw invalid_design_error("stacking needs at least two models");
    const int n = static_cast<int>(models[0].scores.rows());
    for (const auto& mod : models) {
        if (mod.scores.rows() != n)
            throw invalid_design_error("models were fitted on different subject counts");
        if (mod.group_index != models[0].group_index)
            throw invalid_design_error("models were fitted on mismatched subject orderings");
    }

    StackedFit fit;
    fit.models = models;
    fit.subjects = n;
    double df_sum = 0.0;
    for (const auto& mod : models) df_sum += mod.model_df;
    fit.joint_df = df_sum / m;

    // full sandwich over all parameters: bread = N * I^-1, meat = empirical
    // cross-covariance of the stacked per-subject scores
    int p_total = 0, k_total = 0;
    std::vector<int> offset(m), kdim(m), m1dim(m);
    for (int l = 0; l < m; ++l) {
        offset[l] = p_total;
        m1dim[l] = models[l].basis.order() + 1;
        kdim[l] = static_cast<int>(models[l].beta.size());
        p_total += models[l].model_df;
        k_total += kdim[l];
    }
    MatrixXd scores(n, p_total);
    MatrixXd bread = MatrixXd::Zero(p_total, p_total);
    for (int l = 0; l < m; ++l) {
        scores.middleCols(offset[l], models[l].model_df) = models[l].scores;
        bread.block(offset[l], offset[l], models[l].model_df, models[l].model_df) =
            models[l].covariance * n;
    }
    const MatrixXd meat = (scores.transpose() * scores) / n;
    const MatrixXd sandwich = bread * meat * bread.transpose() / n;
    if (sandwich.rows() != p_total)
        throw numeric_domain_error("sandwich dimension mismatch");

    // restrict to the shift parameters
    std::vector<int> shift_idx;
    fit.shift_estimates.resize(k_total);
    int pos = 0;
    for (int l = 0; l < m; ++l) {
        const std::string ep =
            l < static_cast<int>(endpoint_names.size()) ? endpoint_names[l]
                                                        : "endpoint" + std::to_string(l + 1);
        for (int j = 0; j < kdim[l]; ++j, ++pos) {
            shift_idx.push_back(offset[l] + m1dim[l] + j);
            fit.shift_estimates(pos) = models[l].beta(j);
            const std::string cmp = j < static_cast<int>(comparison_labels.size())
                                        ? comparison_labels[j]
                                        : "g" + std::to_string(j + 1) + "/g0";
            fit.labels.push_back(ep + ": " + cmp);
        }
    }

    // shift covariance: congruence-transform the shift-restricted sandwich S
    // with block-diagonal T, T_l = B_l^{1/2} S_ll^{-1/2} (symmetric matrix
    // roots, B_l the marginal observed-information block). The result is PSD
    // (congruence of a PSD matrix), its diagonal blocks equal the marginal
    // covariances exactly, and a duplicated endpoint collapses to the
    // univariate analysis with no extra multiplicity penalty.
    MatrixXd s_shift(k_total, k_total);
    for (int a = 0; a < k_total; ++a)
        for (int b = 0; b < k_total; ++b)
            s_shift(a, b) = sandwich(shift_idx[a], shift_idx[b]);
    s_shift = 0.5 * (s_shift + s_shift.transpose());

    auto matrix_power = [](const MatrixXd& a, double power) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(a);
        const double floor = 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff());
        VectorXd ev = es.eigenvalues().cwiseMax(floor);
        for (int i = 0; i < ev.size(); ++i) ev(i) = std::pow(ev(i), power);
        return MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
    };

    MatrixXd t_block = MatrixXd::Zero(k_total, k_total);
    int shift_pos = 0;
    for (int l = 0; l < m; ++l) {
        const int k = kdim[l];
        const MatrixXd b_marg = models[l].covariance.block(m1dim[l], m1dim[l], k, k);
        const MatrixXd s_marg = s_shift.block(shift_pos, shift_pos, k, k);
        if (!(b_marg.diagonal().minCoeff() > 0.0) || !(s_marg.diagonal().minCoeff() > 0.0))
            throw numeric_domain_error("singular shift covariance in the stack");
        t_block.block(shift_pos, shift_pos, k, k) =
            matrix_power(b_marg, 0.5) * matrix_power(s_marg, -0.5);
        shift_pos += k;
    }
    fit.shift_covariance = t_block * s_shift * t_block.transpose();
    fit.shift_covariance = 0.5 * (fit.shift_covariance + fit.shift_covariance.transpose());
    return fit;
}

MaxTResult mmm_dunnett(const StackedFit& stacked, Tail tail, double alpha,
                       const MvtOptions& opts) {
    return max_t_from_estimates(stacked.shift_estimates, stacked.shift_covariance,
                                stacked.joint_df, stacked.labels, tail, alpha, opts);
}

} // namespace robustmct
