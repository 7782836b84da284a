#include "robustmct/mvt.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "robustmct/quadrature.hpp"

namespace robustmct {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormalDfCutoff = 1e8;  // above this the t is treated as normal
} // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_quantile(double p) {
    static const boost::math::normal_distribution<> nd;
    return boost::math::quantile(nd, p);
}

double t_cdf(double x, double df) {
    if (!std::isfinite(df) || df > kNormalDfCutoff) return norm_cdf(x);
    boost::math::students_t_distribution<> td(df);
    return boost::math::cdf(td, x);
}

double t_quantile(double p, double df) {
    if (!std::isfinite(df) || df > kNormalDfCutoff) return norm_quantile(p);
    boost::math::students_t_distribution<> td(df);
    return boost::math::quantile(td, p);
}

double chi2_quantile(double p, double df) {
    boost::math::chi_squared_distribution<> cd(df);
    return boost::math::quantile(cd, p);
}

CorrelationMatrix::CorrelationMatrix(MatrixXd entries) : m_(std::move(entries)) {
    const int q = static_cast<int>(m_.rows());
    if (q < 1 || m_.cols() != q)
        throw invalid_design_error("correlation matrix must be square and nonempty");
    for (int i = 0; i < q; ++i) {
        if (std::abs(m_(i, i) - 1.0) > 1e-8)
            throw numeric_domain_error("correlation matrix must have unit diagonal");
        m_(i, i) = 1.0;
        for (int j = 0; j < i; ++j) {
            if (std::abs(m_(i, j) - m_(j, i)) > 1e-8)
                throw numeric_domain_error("correlation matrix must be symmetric");
            const double r = 0.5 * (m_(i, j) + m_(j, i));
            if (std::abs(r) > 1.0 + 1e-8)
                throw numeric_domain_error("correlation entries must lie in [-1, 1]");
            m_(i, j) = m_(j, i) = std::clamp(r, -1.0, 1.0);
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m_);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-8)
        throw numeric_domain_error("correlation matrix is not positive semidefinite");
    if (min_eig < 1e-10) {
        // floor tiny/negative eigenvalues and restore the unit diagonal
        VectorXd ev = es.eigenvalues().cwiseMax(1e-10);
        m_ = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        VectorXd d = m_.diagonal().cwiseSqrt();
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) m_(i, j) /= d(i) * d(j);
        m_ = 0.5 * (m_ + m_.transpose());
        m_.diagonal().setOnes();
    }
}

CorrelationMatrix dunnett_correlation(const std::vector<int>& sample_sizes) {
    const int k = static_cast<int>(sample_sizes.size()) - 1;
    if (k < 1) throw invalid_design_error("Dunnett design needs a control and >= 1 treatment");
    for (int n : sample_sizes)
        if (n < 1) throw invalid_design_error("all group sizes must be >= 1");
    const double n0 = sample_sizes[0];
    MatrixXd r = MatrixXd::Identity(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < i; ++j) {
            const double rho = std::sqrt(
                1.0 / ((1.0 + n0 / sample_sizes[i + 1]) * (1.0 + n0 / sample_sizes[j + 1])));
            r(i, j) = r(j, i) = rho;
        }
    return CorrelationMatrix(r);
}

CorrelationMatrix correlation_from_covariance(const MatrixXd& cov) {
    const int q = static_cast<int>(cov.rows());
    MatrixXd r(q, q);
    VectorXd d = cov.diagonal();
    for (int i = 0; i < q; ++i) {
        if (d(i) <= 0.0) throw numeric_domain_error("covariance has a non-positive diagonal");
        for (int j = 0; j < q; ++j) r(i, j) = cov(i, j) / std::sqrt(d(i) * d(j));
    }
    r.diagonal().setOnes();
    return CorrelationMatrix(0.5 * (r + r.transpose()));
}

namespace detail {

std::optional<VectorXd> factor_loadings(const MatrixXd& corr, double tol) {
    const int q = static_cast<int>(corr.rows());
    VectorXd lambda = VectorXd::Zero(q);
    if (q == 1) return lambda;
    bool all_zero = true;
    for (int i = 0; i < q && all_zero; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(corr(i, j)) > tol) { all_zero = false; break; }
    if (all_zero) return lambda;  // independence
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < i; ++j)
            if (corr(i, j) < tol) return std::nullopt;  // only positive products handled
    if (q == 2) {
        lambda(0) = lambda(1) = std::sqrt(corr(0, 1));
    } else {
        for (int i = 0; i < q; ++i) {
            int j = (i == 0) ? 1 : 0;
            int l = (i <= 1) ? 2 : 1;
            const double num = corr(i, j) * corr(i, l);
            lambda(i) = std::sqrt(num / corr(j, l));
        }
    }
    for (int i = 0; i < q; ++i)
        if (!(lambda(i) >= 0.0) || lambda(i) > 1.0 - 1e-9) return std::nullopt;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(lambda(i) * lambda(j) - corr(i, j)) > 1e-8) return std::nullopt;
    return lambda;
}

namespace {

// P(lower*s <= Z <= upper*s) for factor-structured MVN, integrated over the
// shared latent factor with a Gauss-Hermite rule.
double factor_normal_prob(const VectorXd& lower, const VectorXd& upper,
                          const VectorXd& lambda, double s, const QuadratureRule& gh) {
    const int q = static_cast<int>(lower.size());
    double total = 0.0;
    for (int m = 0; m < gh.nodes.size(); ++m) {
        const double z = gh.nodes(m);
        double prod = 1.0;
        for (int i = 0; i < q && prod > 0.0; ++i) {
            const double sigma = std::sqrt(1.0 - lambda(i) * lambda(i));
            const double hi = std::isinf(upper(i)) ? 1.0
                                                   : norm_cdf((upper(i) * s - lambda(i) * z) / sigma);
            const double lo = std::isinf(lower(i)) ? 0.0
                                                   : norm_cdf((lower(i) * s - lambda(i) * z) / sigma);
            prod *= std::max(0.0, hi - lo);
        }
        total += gh.weights(m) * prod;
    }
    return total;
}

double factor_prob(const VectorXd& lower, const VectorXd& upper, const VectorXd& lambda,
                   double df, int nodes) {
    const QuadratureRule gh = gauss_hermite_normal(nodes);
    if (!std::isfinite(df) || df > kNormalDfCutoff)
        return factor_normal_prob(lower, upper, lambda, 1.0, gh);
    const QuadratureRule gl = gauss_legendre01(nodes);
    double total = 0.0;
    for (int m = 0; m < gl.nodes.size(); ++m) {
        const double s = std::sqrt(chi2_quantile(gl.nodes(m), df) / df);
        total += gl.weights(m) * factor_normal_prob(lower, upper, lambda, s, gh);
    }
    return total;
}

} // namespace

ProbResult mvt_rectangle_factor(const VectorXd& lower, const VectorXd& upper,
                                const VectorXd& lambda, double df, int nodes) {
    const double coarse = factor_prob(lower, upper, lambda, df, std::max(16, nodes / 2));
    const double fine = factor_prob(lower, upper, lambda, df, nodes);
    ProbResult r;
    r.value = fine;
    r.error = std::abs(fine - coarse);
    return r;
}

namespace {

// first 64 prime square roots for the Richtmyer sequence
std::vector<double> richtmyer_generators(int dim) {
    std::vector<double> gen;
    gen.reserve(dim);
    int candidate = 2;
    while (static_cast<int>(gen.size()) < dim) {
        bool prime = true;
        for (int d = 2; d * d <= candidate; ++d)
            if (candidate % d == 0) { prime = false; break; }
        if (prime) gen.push_back(std::sqrt(static_cast<double>(candidate)));
        ++candidate;
    }
    return gen;
}

double clamp_prob(double p) { return std::clamp(p, 1e-16, 1.0 - 1e-16); }

// Genz separation-of-variables integrand for one QMC point.
double sov_sample(const VectorXd& a, const VectorXd& b, const MatrixXd& chol,
                  double scale, const double* w) {
    const int q = static_cast<int>(a.size());
    double f = 1.0;
    Eigen::VectorXd y(q);
    for (int i = 0; i < q; ++i) {
        double sum = 0.0;
        for (int j = 0; j < i; ++j) sum += chol(i, j) * y(j);
        const double lii = chol(i, i);
        double d = 0.0, e = 1.0;
        if (lii <= 1e-14) {
            // collapsed dimension after PSD flooring
            d = (std::isinf(a(i)) ? -kInf : a(i) * scale - sum) <= 0.0 ? 0.0 : 1.0;
            e = (std::isinf(b(i)) ? kInf : b(i) * scale - sum) >= 0.0 ? 1.0 : 0.0;
        } else {
            if (!std::isinf(a(i))) d = norm_cdf((a(i) * scale - sum) / lii);
            if (!std::isinf(b(i))) e = norm_cdf((b(i) * scale - sum) / lii);
        }
        const double width = e - d;
        if (width <= 0.0) return 0.0;
        f *= width;
        if (i + 1 < q) y(i) = norm_quantile(clamp_prob(d + w[i] * width));
    }
    return f;
}

} // namespace

ProbResult mvt_rectangle_qmc(const VectorXd& lower, const VectorXd& upper,
                             const CorrelationMatrix& corr, double df, const MvtOptions& opts) {
    const int q = corr.dim();
    const bool finite_df = std::isfinite(df) && df <= kNormalDfCutoff;

    // narrowest variables first improves the SOV conditioning
    std::vector<int> order(q);
    for (int i = 0; i < q; ++i) order[i] = i;
    VectorXd width(q);
    for (int i = 0; i < q; ++i) {
        const double hi = std::isinf(upper(i)) ? 1.0 : norm_cdf(upper(i));
        const double lo = std::isinf(lower(i)) ? 0.0 : norm_cdf(lower(i));
        width(i) = hi - lo;
    }
    std::sort(order.begin(), order.end(), [&](int i, int j) { return width(i) < width(j); });
    VectorXd a(q), b(q);
    MatrixXd r(q, q);
    for (int i = 0; i < q; ++i) {
        a(i) = lower(order[i]);
        b(i) = upper(order[i]);
        for (int j = 0; j < q; ++j) r(i, j) = corr(order[i], order[j]);
    }

    Eigen::LLT<MatrixXd> llt(r);
    MatrixXd chol;
    if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
    } else {
        Eigen::LLT<MatrixXd> jittered(r + 1e-10 * MatrixXd::Identity(q, q));
        if (jittered.info() != Eigen::Success)
            throw numeric_domain_error("correlation matrix admits no Cholesky factor");
        chol = jittered.matrixL();
    }

    const int dim = finite_df ? q : std::max(1, q - 1);
    const std::vector<double> gen = richtmyer_generators(dim);
    constexpr int kShifts = 10;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> shifts(kShifts, std::vector<double>(dim));
    for (auto& s : shifts)
        for (double& v : s) v = unif(rng);

    std::vector<double> means(kShifts, 0.0);
    std::vector<std::size_t> counts(kShifts, 0);
    std::vector<double> w(dim);
    std::size_t n_per_shift = 512;
    std::size_t total = 0;
    std::size_t start = 1;
    ProbResult result;
    while (true) {
        for (int m = 0; m < kShifts; ++m) {
            double sum = 0.0;
            for (std::size_t j = start; j < start + n_per_shift; ++j) {
                for (int d = 0; d < dim; ++d) {
                    double v = std::fmod(static_cast<double>(j) * gen[d] + shifts[m][d], 1.0);
                    w[d] = std::abs(2.0 * v - 1.0);  // baker transform
                }
                double scale = 1.0;
                const double* wn = w.data();
                if (finite_df) {
                    scale = std::sqrt(chi2_quantile(clamp_prob(w[0]), df) / df);
                    wn = w.data() + 1;
                }
                sum += sov_sample(a, b, chol, scale, wn);
            }
            means[m] = (means[m] * counts[m] + sum) / (counts[m] + n_per_shift);
            counts[m] += n_per_shift;
            total += n_per_shift;
        }
        double mean = 0.0;
        for (double v : means) mean += v;
        mean /= kShifts;
        double var = 0.0;
        for (double v : means) var += (v - mean) * (v - mean);
        var /= kShifts * (kShifts - 1);
        result.value = mean;
        result.error = 3.0 * std::sqrt(var);
        if (result.error <= opts.abs_error || total >= opts.max_points) break;
        start += n_per_shift;
        n_per_shift *= 2;
    }
    result.value = std::clamp(result.value, 0.0, 1.0);
    return result;
}

} // namespace detail

ProbResult mvt_rectangle(const VectorXd& lower, const VectorXd& upper,
                         const CorrelationMatrix& corr, double df, const MvtOptions& opts) {
    const int q = corr.dim();
    if (lower.size() != q || upper.size() != q)
        throw invalid_design_error("bound vectors must match the correlation dimension");
    if (q > 64) throw invalid_design_error("dimensions above 64 are not supported");
    if (!(df > 0.0)) throw numeric_domain_error("df must be positive (or infinite)");
    for (int i = 0; i < q; ++i)
        if (!(lower(i) < upper(i)))
            throw invalid_design_error("lower bound must be below upper bound");

    if (q == 1) {
        const double hi = std::isinf(upper(0)) ? 1.0 : t_cdf(upper(0), df);
        const double lo = std::isinf(lower(0)) ? 0.0 : t_cdf(lower(0), df);
        return {std::max(0.0, hi - lo), 1e-15};
    }
    if (opts.allow_fast_path) {
        if (auto lambda = detail::factor_loadings(corr.entries()))
            return detail::mvt_rectangle_factor(lower, upper, *lambda, df, opts.quad_nodes);
    }
    return detail::mvt_rectangle_qmc(lower, upper, corr, df, opts);
}

double equicoordinate_quantile(const CorrelationMatrix& corr, double df, double alpha,
                               Tail tail, const MvtOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_design_error("alpha must be in (0, 1)");
    const int q = corr.dim();
    const bool two_sided = tail == Tail::TwoSided;
    const double p_univ = two_sided ? 1.0 - alpha / 2.0 : 1.0 - alpha;
    const double c_univ = t_quantile(p_univ, df);
    if (q == 1) return c_univ;

    auto coverage = [&](double c) {
        VectorXd up = VectorXd::Constant(q, c);
        VectorXd lo = two_sided ? VectorXd::Constant(q, -c)
                                : VectorXd::Constant(q, -kInf);
        return mvt_rectangle(lo, up, corr, df, opts).value;
    };

    double lo = c_univ;
    double hi = std::max(c_univ * q, c_univ + 1.0);
    while (coverage(hi) < 1.0 - alpha) hi *= 1.5;
    // coverage(lo) <= 1-alpha by Bonferroni-type ordering; bisect on the abscissa
    for (int it = 0; it < 200 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (coverage(mid) < 1.0 - alpha)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace robustmct
