#include "robustmct/robust.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace robustmct {

namespace {

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (hi + v[n / 2 - 1]);
}

struct PsiValues {
    double weight;  // psi(r)/r
    double psi;
    double dpsi;
};

PsiValues eval_psi(PsiFunction psi, double c, double r) {
    const double a = std::abs(r);
    switch (psi) {
        case PsiFunction::Huber:
            if (a <= c) return {1.0, r, 1.0};
            return {c / a, c * (r > 0 ? 1.0 : -1.0), 0.0};
        case PsiFunction::Bisquare: {
            if (a >= c) return {0.0, 0.0, 0.0};
            const double u = (r / c) * (r / c);
            const double w = (1.0 - u) * (1.0 - u);
            return {w, r * w, (1.0 - u) * (1.0 - 5.0 * u)};
        }
    }
    return {1.0, r, 1.0};
}

double default_tuning(PsiFunction psi) {
    return psi == PsiFunction::Huber ? 1.345 : 4.685;
}

} // namespace

MFit m_estimate_oneway(const GroupedSample& sample, const MEstimateOptions& opts) {
    const int g = sample.num_groups();
    const int k = sample.k();
    const int total = sample.total_n();
    const double c = opts.tuning > 0.0 ? opts.tuning : default_tuning(opts.psi);

    // initialize at group medians; scale = normalized MAD of those residuals
    VectorXd level(g);
    std::vector<double> abs_resid;
    abs_resid.reserve(total);
    for (int i = 0; i < g; ++i) {
        const VectorXd& y = sample.group(i).responses;
        std::vector<double> v(y.data(), y.data() + y.size());
        level(i) = median(v);
        for (int j = 0; j < y.size(); ++j) abs_resid.push_back(std::abs(y(j) - level(i)));
    }
    const double scale = 1.4826 * median(abs_resid);
    if (!(scale > 0.0))
        throw degenerate_data_error("MAD of initial residuals is zero");

    MFit fit;
    fit.scale = scale;
    bool converged = false;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        VectorXd next(g);
        double change = 0.0;
        for (int i = 0; i < g; ++i) {
            const VectorXd& y = sample.group(i).responses;
            double wsum = 0.0, wy = 0.0;
            for (int j = 0; j < y.size(); ++j) {
                const double r = (y(j) - level(i)) / scale;
                const double w = eval_psi(opts.psi, c, r).weight;
                wsum += w;
                wy += w * y(j);
            }
            // all observations downweighted to zero: keep the current level
            next(i) = wsum > 0.0 ? wy / wsum : level(i);
            change = std::max(change, std::abs(next(i) - level(i)));
        }
        level = next;
        if (change < opts.tol * scale) {
            converged = true;
            break;
        }
    }
    fit.iterations = iter + 1;
    fit.converged = converged;

    fit.coefficients.resize(g);
    fit.coefficients(0) = level(0);
    for (int i = 1; i < g; ++i) fit.coefficients(i) = level(i) - level(0);

    double sum_psi2 = 0.0, sum_dpsi = 0.0;
    for (int i = 0; i < g; ++i) {
        const VectorXd& y = sample.group(i).responses;
        for (int j = 0; j < y.size(); ++j) {
            const PsiValues p = eval_psi(opts.psi, c, (y(j) - level(i)) / scale);
            sum_psi2 += p.psi * p.psi;
            sum_dpsi += p.dpsi;
        }
    }
    if (sum_dpsi <= 0.0) throw degenerate_data_error("all observations rejected by the psi function");
    const double mean_psi2 = sum_psi2 / total;
    const double mean_dpsi = sum_dpsi / total;
    const int p = k + 1;
    if (total <= p) throw invalid_design_error("not enough observations for the design");
    const double kappa =
        scale * scale * mean_psi2 / (mean_dpsi * mean_dpsi) * total / (total - p);

    // coefficient covariance from the per-group-mean covariance kappa/n_i
    fit.covariance = MatrixXd::Zero(g, g);
    // alpha = m0, beta_i = m_i - m0 with independent group means
    const double v0 = kappa / sample.n(0);
    fit.covariance(0, 0) = v0;
    for (int i = 1; i < g; ++i) {
        fit.covariance(i, i) = kappa / sample.n(i) + v0;
        fit.covariance(0, i) = fit.covariance(i, 0) = -v0;
        for (int j = 1; j < i; ++j) fit.covariance(i, j) = fit.covariance(j, i) = v0;
    }
    return fit;
}

MaxTResult robust_dunnett(const GroupedSample& sample, const MEstimateOptions& opts, Tail tail,
                          double alpha, const MvtOptions& mvt_opts) {
    const MFit fit = m_estimate_oneway(sample, opts);
    const int k = sample.k();
    const VectorXd beta = fit.coefficients.tail(k);
    const MatrixXd cov = fit.covariance.bottomRightCorner(k, k);
    const double df = sample.total_n() - (k + 1);
    std::vector<std::string> labels;
    for (int i = 1; i <= k; ++i)
        labels.push_back(sample.group(i).label + " - " + sample.group(0).label);
    return max_t_from_estimates(beta, cov, df, labels, tail, alpha, mvt_opts);
}

} // namespace robustmct
