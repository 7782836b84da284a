#include "robustmct/contrast.hpp"

#include <cmath>
#include <limits>

namespace robustmct {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

VectorXd adjusted_pvalues(const VectorXd& tstats, const CorrelationMatrix& corr, double df,
                          Tail tail, const MvtOptions& opts) {
    const int q = corr.dim();
    if (tstats.size() != q)
        throw invalid_design_error("statistic vector does not match the correlation dimension");
    if (!(df > 0.0)) throw numeric_domain_error("df must be positive");
    VectorXd p(q);
    for (int j = 0; j < q; ++j) {
        double prob;
        switch (tail) {
            case Tail::TwoSided: {
                const double t = std::abs(tstats(j));
                if (t == 0.0) { p(j) = 1.0; continue; }
                prob = mvt_rectangle(VectorXd::Constant(q, -t), VectorXd::Constant(q, t),
                                     corr, df, opts).value;
                break;
            }
            case Tail::Greater:
                prob = mvt_rectangle(VectorXd::Constant(q, -kInf),
                                     VectorXd::Constant(q, tstats(j)), corr, df, opts).value;
                break;
            case Tail::Less:
                prob = mvt_rectangle(VectorXd::Constant(q, -kInf),
                                     VectorXd::Constant(q, -tstats(j)), corr, df, opts).value;
                break;
            default:
                prob = 0.0;
        }
        p(j) = std::clamp(1.0 - prob, 0.0, 1.0);
    }
    return p;
}

MaxTResult max_t_from_estimates(const VectorXd& estimates, const MatrixXd& covariance,
                                double df, const std::vector<std::string>& labels, Tail tail,
                                double alpha, const MvtOptions& opts) {
    const int q = static_cast<int>(estimates.size());
    if (covariance.rows() != q || covariance.cols() != q)
        throw invalid_design_error("covariance does not match the estimate vector");
    MaxTResult res;
    res.labels = labels;
    if (res.labels.empty())
        for (int j = 0; j < q; ++j) res.labels.push_back("C" + std::to_string(j + 1));
    res.estimates = estimates;
    res.std_errors = covariance.diagonal().cwiseSqrt();
    if (!(res.std_errors.minCoeff() > 0.0))
        throw degenerate_data_error("zero standard error in a contrast");
    res.t_stats = estimates.cwiseQuotient(res.std_errors);
    CorrelationMatrix corr = correlation_from_covariance(covariance);
    res.correlation = corr.entries();
    res.df = df;
    res.alpha = alpha;
    res.tail = tail;
    res.p_adjusted = adjusted_pvalues(res.t_stats, corr, df, tail, opts);
    res.critical_value = equicoordinate_quantile(corr, df, alpha, tail, opts);
    res.lower.resize(q);
    res.upper.resize(q);
    for (int j = 0; j < q; ++j) {
        const double half = res.critical_value * res.std_errors(j);
        switch (tail) {
            case Tail::TwoSided:
                res.lower(j) = estimates(j) - half;
                res.upper(j) = estimates(j) + half;
                break;
            case Tail::Greater:  // one-sided lower bounds
                res.lower(j) = estimates(j) - half;
                res.upper(j) = kInf;
                break;
            case Tail::Less:
                res.lower(j) = -kInf;
                res.upper(j) = estimates(j) + half;
                break;
        }
    }
    return res;
}

MaxTResult max_t_test(const GroupedSample& sample, const ContrastMatrix& contrasts,
                      const VarianceMethod& method, Tail tail, double alpha,
                      const MvtOptions& opts) {
    if (contrasts.cols() != sample.num_groups())
        throw invalid_design_error("contrast columns do not match the group count");
    const MatrixXd& c = contrasts.coefficients();
    const VectorXd estimates = c * sample.means();

    MatrixXd cov;
    double df = kInf;
    VectorXd df_per;

    if (std::holds_alternative<PooledMethod>(method)) {
        const PooledVariance pv = pooled_variance(sample);
        if (pv.s2 <= 0.0) throw degenerate_data_error("pooled variance is zero");
        VectorXd mean_var(sample.num_groups());
        for (int i = 0; i < sample.num_groups(); ++i) mean_var(i) = pv.s2 / sample.n(i);
        cov = c * mean_var.asDiagonal() * c.transpose();
        df = pv.df;
    } else if (std::holds_alternative<SatterthwaiteMethod>(method)) {
        const auto sw = satterthwaite(HeteroSummary::from_sample(sample), contrasts);
        cov = sw.correlation.entries();
        for (int i = 0; i < cov.rows(); ++i)
            for (int j = 0; j < cov.cols(); ++j)
                cov(i, j) *= std::sqrt(sw.contrast_variances(i) * sw.contrast_variances(j));
        // conservative joint df: the smallest group determines the quantile,
        // keeping the familywise level when group spreads differ sharply
        int min_n = sample.n(0);
        for (int i = 1; i < sample.num_groups(); ++i) min_n = std::min(min_n, sample.n(i));
        df = std::max(1, min_n - 1);
        df_per = sw.df;
    } else if (const auto* sm = std::get_if<SandwichMethod>(&method)) {
        const auto sr = sandwich_covariance(sample, contrasts, sm->df);
        cov = sr.contrast_covariance;
        df = sr.df;
    } else {
        const auto& ext = std::get<ExternalCovariance>(method);
        cov = ext.contrast_covariance;
        df = ext.df;
        df_per = ext.df_per_contrast;
    }

    MaxTResult res = max_t_from_estimates(estimates, cov, df, contrasts.labels(), tail, alpha, opts);
    res.df_per_contrast = df_per;
    return res;
}

} // namespace robustmct
