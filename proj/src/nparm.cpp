#include "robustmct/nparm.hpp"

#include <cmath>

namespace robustmct {

namespace {

// empirical cdf with mid-rank tie handling evaluated at x
double placement(const VectorXd& sample, double x) {
    double below = 0.0, tied = 0.0;
    for (int j = 0; j < sample.size(); ++j) {
        if (sample(j) < x) below += 1.0;
        else if (sample(j) == x) tied += 1.0;
    }
    return (below + 0.5 * tied) / sample.size();
}

double sample_variance(const VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / (v.size() - 1);
}

double sample_covariance(const VectorXd& a, const VectorXd& b) {
    const double ma = a.mean(), mb = b.mean();
    return ((a.array() - ma) * (b.array() - mb)).sum() / (a.size() - 1);
}

} // namespace

RelEffects relative_effects(const GroupedSample& sample) {
    const int k = sample.k();
    const VectorXd& x0 = sample.group(0).responses;
    const int n0 = static_cast<int>(x0.size());

    RelEffects rel;
    rel.p_hat.resize(k);
    rel.variance.resize(k);
    rel.df.resize(k);
    rel.covariance = MatrixXd::Zero(k, k);
    rel.boundary.assign(k, false);

    // control placements F_i(x0j), kept for the shared-control covariance
    MatrixXd ctrl_plc(n0, k);
    int degenerate_count = 0;
    for (int i = 0; i < k; ++i) {
        const VectorXd& xi = sample.group(i + 1).responses;
        const int ni = static_cast<int>(xi.size());
        VectorXd trt_plc(ni);
        for (int l = 0; l < ni; ++l) trt_plc(l) = placement(x0, xi(l));
        for (int j = 0; j < n0; ++j) ctrl_plc(j, i) = placement(xi, x0(j));

        double p = trt_plc.mean();
        double s0 = sample_variance(ctrl_plc.col(i));
        double si = sample_variance(trt_plc);
        double v = s0 / n0 + si / ni;

        if (v <= 0.0) {
            if (std::abs(p - 0.5) < 1e-12) {
                ++degenerate_count;
                rel.p_hat(i) = 0.5;
                rel.variance(i) = 0.0;
                rel.df(i) = n0 + ni - 2;
                continue;
            }
            // complete separation: continuity-correct and floor the variance
            const double eps = 1.0 / (2.0 * n0 * ni);
            p = std::clamp(p, eps, 1.0 - eps);
            v = p * (1.0 - p) * (1.0 / n0 + 1.0 / ni);
            rel.boundary[i] = true;
            rel.df(i) = n0 + ni - 2;
        } else {
            const double t0 = s0 / n0, ti = si / ni;
            rel.df(i) = v * v / (t0 * t0 / (n0 - 1) + ti * ti / (ni - 1));
            if (p <= 0.0 || p >= 1.0) {
                const double eps = 1.0 / (2.0 * n0 * ni);
                p = std::clamp(p, eps, 1.0 - eps);
                rel.boundary[i] = true;
            }
        }
        rel.p_hat(i) = p;
        rel.variance(i) = v;
    }
    if (degenerate_count == k)
        throw degenerate_data_error("all placements tied: no usable variation");

    for (int i = 0; i < k; ++i) {
        rel.covariance(i, i) = rel.variance(i);
        for (int j = 0; j < i; ++j) {
            const double c = sample_covariance(ctrl_plc.col(i), ctrl_plc.col(j)) / n0;
            rel.covariance(i, j) = rel.covariance(j, i) = c;
        }
    }
    return rel;
}

MaxTResult npar_dunnett(const GroupedSample& sample, Tail tail, double alpha, EffectScale scale,
                        const MvtOptions& opts) {
    const RelEffects rel = relative_effects(sample);
    const int k = sample.k();
    for (int i = 0; i < k; ++i)
        if (rel.variance(i) <= 0.0)
            throw degenerate_data_error("zero placement variance in contrast " + std::to_string(i));

    auto g = [&](double p) {
        switch (scale) {
            case EffectScale::Probit: return norm_quantile(p);
            case EffectScale::Logit: return std::log(p / (1.0 - p));
            case EffectScale::Identity: return p - 0.5;
        }
        return 0.0;
    };
    auto g_deriv = [&](double p) {
        switch (scale) {
            case EffectScale::Probit: return 1.0 / norm_pdf(norm_quantile(p));
            case EffectScale::Logit: return 1.0 / (p * (1.0 - p));
            case EffectScale::Identity: return 1.0;
        }
        return 1.0;
    };
    auto g_inv = [&](double z) {
        switch (scale) {
            case EffectScale::Probit: return norm_cdf(z);
            case EffectScale::Logit: return 1.0 / (1.0 + std::exp(-z));
            case EffectScale::Identity: return std::clamp(z + 0.5, 0.0, 1.0);
        }
        return 0.5;
    };

    VectorXd stat(k), se_g(k);
    for (int i = 0; i < k; ++i) {
        se_g(i) = std::sqrt(rel.variance(i)) * g_deriv(rel.p_hat(i));
        stat(i) = g(rel.p_hat(i)) / se_g(i);
    }
    const CorrelationMatrix corr = correlation_from_covariance(rel.covariance);
    const double df = rel.df.minCoeff();

    MaxTResult res;
    res.labels.clear();
    for (int i = 1; i <= k; ++i)
        res.labels.push_back("p(" + sample.group(0).label + "," + sample.group(i).label + ")");
    res.estimates = rel.p_hat;
    res.std_errors = rel.variance.cwiseSqrt();
    res.t_stats = stat;
    res.df = df;
    res.df_per_contrast = rel.df;
    res.alpha = alpha;
    res.tail = tail;
    res.correlation = corr.entries();
    res.boundary_flag = rel.boundary;
    res.p_adjusted = adjusted_pvalues(stat, corr, df, tail, opts);
    res.critical_value = equicoordinate_quantile(corr, df, alpha, tail, opts);
    res.lower.resize(k);
    res.upper.resize(k);
    for (int i = 0; i < k; ++i) {
        const double center = g(rel.p_hat(i));
        const double half = res.critical_value * se_g(i);
        const double lo_z = tail == Tail::Less ? -std::numeric_limits<double>::infinity()
                                               : center - half;
        const double hi_z = tail == Tail::Greater ? std::numeric_limits<double>::infinity()
                                                  : center + half;
        res.lower(i) = std::isinf(lo_z) ? 0.0 : g_inv(lo_z);
        res.upper(i) = std::isinf(hi_z) ? 1.0 : g_inv(hi_z);
    }
    return res;
}

} // namespace robustmct
