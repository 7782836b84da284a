#include "robustmct/mlt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace robustmct {

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
    return r;
}

} // namespace

BernsteinBasis::BernsteinBasis(int order, double lo, double hi)
    : order_(order), lo_(lo), hi_(hi) {
    if (order < 1) throw invalid_design_error("Bernstein order must be >= 1");
    if (!(lo < hi)) throw invalid_design_error("Bernstein support must have lo < hi");
}

VectorXd BernsteinBasis::eval_inside(double y) const {
    const double x = (y - lo_) / (hi_ - lo_);
    VectorXd a(order_ + 1);
    for (int j = 0; j <= order_; ++j)
        a(j) = binom(order_, j) * std::pow(x, j) * std::pow(1.0 - x, order_ - j);
    return a;
}

VectorXd BernsteinBasis::deriv_inside(double y) const {
    const double x = (y - lo_) / (hi_ - lo_);
    const int m = order_ - 1;
    VectorXd lower(m + 1);
    for (int j = 0; j <= m; ++j)
        lower(j) = binom(m, j) * std::pow(x, j) * std::pow(1.0 - x, m - j);
    VectorXd d(order_ + 1);
    const double f = order_ / (hi_ - lo_);
    for (int j = 0; j <= order_; ++j) {
        const double left = (j >= 1) ? lower(j - 1) : 0.0;
        const double right = (j <= m) ? lower(j) : 0.0;
        d(j) = f * (left - right);
    }
    return d;
}

VectorXd BernsteinBasis::eval(double y) const {
    if (y < lo_) return eval_inside(lo_) + (y - lo_) * deriv_inside(lo_);
    if (y > hi_) return eval_inside(hi_) + (y - hi_) * deriv_inside(hi_);
    return eval_inside(y);
}

VectorXd BernsteinBasis::deriv(double y) const {
    return deriv_inside(std::clamp(y, lo_, hi_));
}

std::pair<double, double> support_from_sample(const VectorXd& responses, double p_lo,
                                              double p_hi) {
    const int n = static_cast<int>(responses.size());
    if (n < 2) throw invalid_design_error("support needs at least two observations");
    std::vector<double> v(responses.data(), responses.data() + n);
    std::sort(v.begin(), v.end());
    if (v.front() == v.back()) throw degenerate_data_error("all responses are equal");
    auto type7 = [&](double p) {
        const double h = (n - 1) * p;
        const int i = static_cast<int>(std::floor(h));
        const double w = h - i;
        return (i + 1 < n) ? (1.0 - w) * v[i] + w * v[i + 1] : v[n - 1];
    };
    const double lo = type7(p_lo);
    const double hi = type7(p_hi);
    if (!(lo < hi)) throw degenerate_data_error("degenerate trimmed support");
    return {lo, hi};
}

namespace {

// link log-density and its first two derivatives
inline void link_logdens(Link link, double z, double& val, double& d1, double& d2) {
    if (link == Link::Normal) {
        val = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
        d1 = -z;
        d2 = -1.0;
    } else {
        // standard logistic: log f = z - 2 log(1 + e^z)
        const double s = 1.0 / (1.0 + std::exp(-z));
        const double log1pez = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        val = z - 2.0 * log1pez;
        d1 = 1.0 - 2.0 * s;
        d2 = -2.0 * s * (1.0 - s);
    }
}

// per-observation basis rows, computed once per fit
struct DesignCache {
    MatrixXd basis_rows;   // N x (M+1), a(y_i)
    MatrixXd deriv_rows;   // N x (M+1), a'(y_i)
    std::vector<int> gidx; // group per row
    int m1 = 0;
    int k = 0;

    DesignCache(const GroupedSample& sample, const BernsteinBasis& basis) {
        const int n = sample.total_n();
        m1 = basis.order() + 1;
        k = sample.k();
        basis_rows.resize(n, m1);
        deriv_rows.resize(n, m1);
        gidx = sample.group_index();
        const VectorXd y = sample.stacked();
        for (int i = 0; i < n; ++i) {
            basis_rows.row(i) = basis.eval(y(i));
            deriv_rows.row(i) = basis.deriv(y(i));
        }
    }

    double loglik_grad(const VectorXd& theta, const VectorXd& beta, Link link, VectorXd& grad,
                       MatrixXd* hess = nullptr) const {
        const int n = static_cast<int>(basis_rows.rows());
        grad.setZero(m1 + k);
        if (hess) hess->setZero(m1 + k, m1 + k);
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            const double hp = deriv_rows.row(i).dot(theta);
            if (!(hp > 0.0)) return -std::numeric_limits<double>::infinity();
            const int g = gidx[i];
            const double z = basis_rows.row(i).dot(theta) + (g == 0 ? 0.0 : beta(g - 1));
            double lf, d1, d2;
            link_logdens(link, z, lf, d1, d2);
            ll += lf + std::log(hp);
            grad.head(m1) += d1 * basis_rows.row(i).transpose() +
                             deriv_rows.row(i).transpose() / hp;
            if (g > 0) grad(m1 + g - 1) += d1;
            if (hess) {
                const auto a = basis_rows.row(i);
                const auto b = deriv_rows.row(i);
                hess->topLeftCorner(m1, m1).noalias() +=
                    d2 * a.transpose() * a - (b.transpose() * b) / (hp * hp);
                if (g > 0) {
                    const int c = m1 + g - 1;
                    hess->block(0, c, m1, 1).noalias() += d2 * a.transpose();
                    hess->block(c, 0, 1, m1).noalias() += d2 * a;
                    (*hess)(c, c) += d2;
                }
            }
        }
        return ll;
    }
};

struct Unconstrained {
    // p = (theta_1, gamma_1..gamma_M, beta); theta_{j+1} = theta_j + exp(gamma_j)
    int m1;
    int k;

    void split(const VectorXd& p, VectorXd& theta, VectorXd& beta) const {
        theta.resize(m1);
        theta(0) = p(0);
        for (int j = 1; j < m1; ++j) theta(j) = theta(j - 1) + std::exp(p(j));
        beta = p.tail(k);
    }

    // Jacobian d(theta, beta)/dp: block diagonal with a lower-triangular
    // theta block (column 0 all ones, column j >= 1 has exp(p_j) below the
    // diagonal) and an identity beta block.
    MatrixXd jacobian(const VectorXd& p) const {
        MatrixXd J = MatrixXd::Zero(m1 + k, m1 + k);
        for (int row = 0; row < m1; ++row) {
            J(row, 0) = 1.0;
            for (int j = 1; j <= row; ++j) J(row, j) = std::exp(p(j));
        }
        J.bottomRightCorner(k, k).setIdentity();
        return J;
    }

    VectorXd theta_suffix(const VectorXd& grad_tb) const {
        VectorXd suffix(m1);
        double cum = 0.0;
        for (int j = m1 - 1; j >= 0; --j) {
            cum += grad_tb(j);
            suffix(j) = cum;
        }
        return suffix;
    }
};

struct FitState {
    VectorXd params;
    double loglik = -std::numeric_limits<double>::infinity();
    bool converged = false;
};

// damped Newton ascent in the unconstrained parameterization with the exact
// chain-rule Hessian; ridge damping handles indefinite curvature away from
// the optimum, and the line search keeps the transformation slope positive
FitState newton_fit(const DesignCache& cache, Link link, const Unconstrained& map, VectorXd p0,
                    int max_iter, double grad_tol) {
    const int dim = static_cast<int>(p0.size());
    const int m1 = map.m1;
    VectorXd theta, beta, grad_tb;
    MatrixXd hess_tb;
    auto eval = [&](const VectorXd& p, bool with_hess) {
        map.split(p, theta, beta);
        return cache.loglik_grad(theta, beta, link, grad_tb, with_hess ? &hess_tb : nullptr);
    };

    VectorXd p = std::move(p0);
    double f = eval(p, true);
    FitState state;
    if (!std::isfinite(f)) return state;

    for (int it = 0; it < max_iter; ++it) {
        const MatrixXd J = map.jacobian(p);
        const VectorXd g = J.transpose() * grad_tb;
        // first-order condition of the reparameterized problem; the raw
        // (theta, beta) gradient need not vanish when coefficients tie
        if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
            state.converged = true;
            break;
        }
        MatrixXd H = J.transpose() * hess_tb * J;
        // curvature of the theta reparameterization itself
        const VectorXd suffix = map.theta_suffix(grad_tb);
        for (int j = 1; j < m1; ++j) H(j, j) += std::exp(p(j)) * suffix(j);

        // ascent direction from -(H + ridge)^{-1} g with growing ridge
        VectorXd dir;
        const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
        double ridge = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            MatrixXd A = -H + ridge * scale * MatrixXd::Identity(dim, dim);
            Eigen::LDLT<MatrixXd> ldlt(A);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                dir = ldlt.solve(g);
                if (dir.dot(g) > 0.0 && dir.allFinite()) break;
            }
            dir.setZero();
            ridge = (ridge == 0.0) ? 1e-8 : ridge * 100.0;
        }
        if (dir.size() == 0 || dir.dot(g) <= 0.0) dir = g / scale;

        double step = 1.0;
        bool accepted = false;
        VectorXd p_new;
        for (int ls = 0; ls < 60; ++ls) {
            p_new = p + step * dir;
            const double f_new = eval(p_new, false);
            if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * g.dot(dir)) {
                accepted = true;
                f = f_new;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        p = p_new;
        f = eval(p, true);
    }
    if (!state.converged) {
        eval(p, false);
        const VectorXd g_final = map.jacobian(p).transpose() * grad_tb;
        state.converged = g_final.lpNorm<Eigen::Infinity>() < grad_tol;
    }
    state.params = p;
    state.loglik = f;
    return state;
}

} // namespace

namespace detail {

MltObjective mlt_objective(const GroupedSample& sample, const BernsteinBasis& basis,
                           const VectorXd& theta, const VectorXd& beta, Link link,
                           bool with_hessian) {
    const int m1 = basis.order() + 1;
    const int k = sample.k();
    const int p = m1 + k;
    MltObjective obj;
    obj.loglik = 0.0;
    obj.gradient = VectorXd::Zero(p);
    if (with_hessian) obj.hessian = MatrixXd::Zero(p, p);

    VectorXd u(p);
    for (int g = 0; g < sample.num_groups(); ++g) {
        const double shift = (g == 0) ? 0.0 : beta(g - 1);
        const VectorXd& y = sample.group(g).responses;
        for (int i = 0; i < y.size(); ++i) {
            const VectorXd a = basis.eval(y(i));
            const VectorXd b = basis.deriv(y(i));
            const double hp = b.dot(theta);
            if (!(hp > 0.0)) {
                obj.loglik = -std::numeric_limits<double>::infinity();
                return obj;
            }
            const double z = a.dot(theta) + shift;
            double lf, d1, d2;
            link_logdens(link, z, lf, d1, d2);
            obj.loglik += lf + std::log(hp);

            u.setZero();
            u.head(m1) = a;
            if (g > 0) u(m1 + g - 1) = 1.0;
            obj.gradient += d1 * u;
            obj.gradient.head(m1) += b / hp;
            if (with_hessian) {
                obj.hessian.noalias() += d2 * u * u.transpose();
                obj.hessian.topLeftCorner(m1, m1).noalias() -= (b * b.transpose()) / (hp * hp);
            }
        }
    }
    return obj;
}

} // namespace detail

TransformationModel fit_mlt(const GroupedSample& sample, const MltOptions& opts) {
    const int k = sample.k();
    const int m1 = opts.order + 1;
    if (sample.total_n() < m1 + k + 2)
        throw invalid_design_error("too few observations for the transformation model");

    const auto [lo, hi] = support_from_sample(sample.stacked());
    BernsteinBasis basis(opts.order, lo, hi);
    DesignCache cache(sample, basis);
    Unconstrained map{m1, k};

    // primary start: theta_j = link^{-1}(empirical CDF) at equispaced support
    // points, the nonparametric estimate of the transformation; this keeps the
    // Newton iteration away from the sticky exp-reparameterization boundary
    const VectorXd pooled = sample.stacked();
    const int n_total = static_cast<int>(pooled.size());
    auto ecdf = [&](double y) {
        int c = 0;
        for (int i = 0; i < n_total; ++i) c += pooled(i) <= y;
        return std::clamp((c + 0.5) / (n_total + 1.0), 0.02, 0.98);
    };
    auto link_quantile = [&](double u) {
        if (opts.link == Link::Logistic) return std::log(u / (1.0 - u));
        return norm_quantile(u);
    };
    VectorXd theta0(m1);
    for (int j = 0; j < m1; ++j)
        theta0(j) = link_quantile(ecdf(lo + (hi - lo) * j / opts.order));
    // enforce strict monotonicity of the start
    const double min_gap = 1e-2 * std::max(1.0, theta0(m1 - 1) - theta0(0));
    for (int j = 1; j < m1; ++j) theta0(j) = std::max(theta0(j), theta0(j - 1) + min_gap);

    VectorXd p0 = VectorXd::Zero(m1 + k);
    p0(0) = theta0(0);
    for (int j = 1; j < m1; ++j) p0(j) = std::log(theta0(j) - theta0(j - 1));
    FitState best = newton_fit(cache, opts.link, map, p0, opts.max_iter, opts.grad_tol);

    // deterministic fallback starts: identity-like, flat, steep transformation
    if (!best.converged) {
        for (double span : {2.0, 0.6, 4.0}) {
            VectorXd pf = VectorXd::Zero(m1 + k);
            pf(0) = -span;
            for (int j = 1; j < m1; ++j) pf(j) = std::log(2.0 * span / opts.order);
            FitState st = newton_fit(cache, opts.link, map, pf, opts.max_iter, opts.grad_tol);
            if ((st.converged && !best.converged) || st.loglik > best.loglik) best = st;
            if (best.converged) break;
        }
    }
    if (!std::isfinite(best.loglik))
        throw degenerate_data_error("transformation model likelihood is degenerate");

    VectorXd theta, beta;
    map.split(best.params, theta, beta);
    auto obj = detail::mlt_objective(sample, basis, theta, beta, opts.link, true);

    TransformationModel model{basis, theta, beta, opts.link};
    model.loglik = obj.loglik;
    model.gradient_norm = obj.gradient.norm();
    model.converged = best.converged;
    model.model_df = m1 + k;
    model.group_index = sample.group_index();

    MatrixXd info = -obj.hessian;
    Eigen::LDLT<MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(info);
        VectorXd ev = es.eigenvalues().cwiseMax(1e-10);
        model.covariance =
            es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    } else {
        model.covariance = ldlt.solve(MatrixXd::Identity(info.rows(), info.cols()));
    }
    model.information = info;

    // per-subject scores, stacked in sample order
    model.scores.resize(sample.total_n(), m1 + k);
    for (int i = 0; i < sample.total_n(); ++i) {
        const int g = cache.gidx[i];
        const double hp = cache.deriv_rows.row(i).dot(theta);
        const double z = cache.basis_rows.row(i).dot(theta) + (g == 0 ? 0.0 : beta(g - 1));
        double lf, d1, d2;
        link_logdens(opts.link, z, lf, d1, d2);
        VectorXd s = VectorXd::Zero(m1 + k);
        s.head(m1) = d1 * cache.basis_rows.row(i).transpose() +
                     cache.deriv_rows.row(i).transpose() / hp;
        if (g > 0) s(m1 + g - 1) = d1;
        model.scores.row(i) = s;
    }
    return model;
}

MaxTResult mlt_dunnett(const TransformationModel& model, std::optional<double> df, Tail tail,
                       double alpha, const MvtOptions& opts,
                       const std::vector<std::string>& labels) {
    const int k = static_cast<int>(model.beta.size());
    const MatrixXd cov = model.covariance.bottomRightCorner(k, k);
    if (cov.diagonal().minCoeff() <= 0.0)
        throw numeric_domain_error("singular shift covariance");
    return max_t_from_estimates(model.beta, cov,
                                df.value_or(std::numeric_limits<double>::infinity()), labels,
                                tail, alpha, opts);
}

ColrResult colr_dunnett(const GroupedSample& sample, int order, Tail tail, double alpha,
                        std::optional<double> df, const MvtOptions& opts) {
    MltOptions mopts;
    mopts.order = order;
    mopts.link = Link::Logistic;
    TransformationModel model = fit_mlt(sample, mopts);
    std::vector<std::string> labels;
    for (int i = 1; i <= sample.k(); ++i)
        labels.push_back(sample.group(i).label + " / " + sample.group(0).label);
    ColrResult res;
    res.wald = mlt_dunnett(model, df, tail, alpha, opts, labels);
    const int k = sample.k();
    res.odds_ratio.resize(k);
    res.or_lower.resize(k);
    res.or_upper.resize(k);
    for (int i = 0; i < k; ++i) {
        res.odds_ratio(i) = std::exp(-res.wald.estimates(i));
        res.or_lower(i) = std::exp(-res.wald.upper(i));
        res.or_upper(i) = std::exp(-res.wald.lower(i));
    }
    return res;
}

} // namespace robustmct
