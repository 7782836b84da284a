#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "robustmct/types.hpp"

namespace robustmct {

/// Symmetric, unit-diagonal, PSD (up to -1e-8) correlation matrix.
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(MatrixXd entries);

    int dim() const { return static_cast<int>(m_.rows()); }
    const MatrixXd& entries() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

private:
    MatrixXd m_;
};

/// Dunnett many-to-one correlation for group sizes (n0, n1, ..., nk).
CorrelationMatrix dunnett_correlation(const std::vector<int>& sample_sizes);

/// Correlation of C * x for x with covariance diag entries cov; returns the
/// correlation of a general contrast covariance matrix.
CorrelationMatrix correlation_from_covariance(const MatrixXd& cov);

struct ProbResult {
    double value = 0.0;
    double error = 0.0;  // absolute error estimate
};

struct MvtOptions {
    double abs_error = 1e-4;
    std::uint64_t seed = 0x243F6A8885A308D3ull;  // fixed default
    std::size_t max_points = std::size_t(1) << 22;
    int quad_nodes = 64;  // factor fast path
    bool allow_fast_path = true;
};

/// P(lower <= T <= upper) for T ~ multivariate t(df, corr); df = inf gives the
/// multivariate normal. Uses one-dimensional quadrature when corr has exact
/// factor structure rho_ij = lambda_i * lambda_j, randomized QMC otherwise.
ProbResult mvt_rectangle(const VectorXd& lower, const VectorXd& upper,
                         const CorrelationMatrix& corr, double df,
                         const MvtOptions& opts = {});

/// Equicoordinate critical value c with P(rectangle) = 1 - alpha; the
/// rectangle is [-c,c]^q for TwoSided and one-sided otherwise.
double equicoordinate_quantile(const CorrelationMatrix& corr, double df, double alpha,
                               Tail tail, const MvtOptions& opts = {});

namespace detail {
/// lambda with rho_ij = lambda_i lambda_j (exact within tol), if it exists.
std::optional<VectorXd> factor_loadings(const MatrixXd& corr, double tol = 1e-9);
/// Rectangle probability via the factor-structure quadrature path.
ProbResult mvt_rectangle_factor(const VectorXd& lower, const VectorXd& upper,
                                const VectorXd& lambda, double df, int nodes);
/// Rectangle probability via randomized QMC (Genz separation of variables).
ProbResult mvt_rectangle_qmc(const VectorXd& lower, const VectorXd& upper,
                             const CorrelationMatrix& corr, double df,
                             const MvtOptions& opts);
} // namespace detail

// univariate distribution helpers shared across modules
double norm_cdf(double x);
double norm_quantile(double p);
double norm_pdf(double x);
double t_cdf(double x, double df);
double t_quantile(double p, double df);
double chi2_quantile(double p, double df);

} // namespace robustmct
