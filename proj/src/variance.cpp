#include "robustmct/variance.hpp"

#include <cmath>

namespace robustmct {

HeteroSummary HeteroSummary::from_sample(const GroupedSample& sample) {
    HeteroSummary s;
    s.means = sample.means();
    s.variances = sample.variances();
    s.sizes = sample.sizes();
    return s;
}

PooledVariance pooled_variance(const GroupedSample& sample) {
    double ss = 0.0;
    double df = 0.0;
    for (int i = 0; i < sample.num_groups(); ++i) {
        const double w = sample.n(i) - 1;
        ss += w * sample.variance(i);
        df += w;
    }
    if (df <= 0.0) throw degenerate_data_error("no within-group degrees of freedom");
    return {ss / df, df};
}

SatterthwaiteResult satterthwaite(const HeteroSummary& summary, const ContrastMatrix& contrasts) {
    const int q = contrasts.rows();
    const int g = static_cast<int>(summary.sizes.size());
    if (contrasts.cols() != g)
        throw invalid_design_error("contrast columns do not match the group count");
    const MatrixXd& c = contrasts.coefficients();

    VectorXd cv(q);   // variance of each contrast estimate
    VectorXd df(q);
    for (int r = 0; r < q; ++r) {
        double v = 0.0, denom = 0.0;
        for (int l = 0; l < g; ++l) {
            const double cl2 = c(r, l) * c(r, l);
            if (cl2 == 0.0) continue;
            if (summary.variances(l) <= 0.0)
                throw degenerate_data_error("zero variance in a group with nonzero coefficient");
            const double term = cl2 * summary.variances(l) / summary.sizes[l];
            v += term;
            denom += term * term / (summary.sizes[l] - 1);
        }
        if (denom <= 0.0) throw degenerate_data_error("degenerate Satterthwaite denominator");
        cv(r) = v;
        df(r) = v * v / denom;
    }

    MatrixXd rho = MatrixXd::Identity(q, q);
    for (int r = 0; r < q; ++r)
        for (int s = 0; s < r; ++s) {
            double num = 0.0;
            for (int l = 0; l < g; ++l)
                num += c(r, l) * c(s, l) * summary.variances(l) / summary.sizes[l];
            rho(r, s) = rho(s, r) = num / std::sqrt(cv(r) * cv(s));
        }
    return {df, CorrelationMatrix(rho), cv};
}

SandwichResult sandwich_covariance(const GroupedSample& sample, const ContrastMatrix& contrasts,
                                   double df) {
    const int g = sample.num_groups();
    if (contrasts.cols() != g)
        throw invalid_design_error("contrast columns do not match the group count");
    VectorXd mean_var(g);
    for (int i = 0; i < g; ++i) {
        if (sample.n(i) < 2) throw invalid_design_error("sandwich backend needs n_i >= 2");
        mean_var(i) = sample.variance(i) / (sample.n(i) - 1);  // HC3, leverage 1/n_i
    }
    const MatrixXd& c = contrasts.coefficients();
    MatrixXd cov = c * mean_var.asDiagonal() * c.transpose();
    if (cov.diagonal().minCoeff() <= 0.0)
        throw degenerate_data_error("sandwich contrast covariance is degenerate");
    return {cov, correlation_from_covariance(cov), df};
}

} // namespace robustmct
