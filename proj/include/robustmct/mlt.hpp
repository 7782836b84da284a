#pragma once

#include <optional>

#include "robustmct/contrast.hpp"
#include "robustmct/types.hpp"

namespace robustmct {

enum class Link { Normal, Logistic };

/// Bernstein polynomial basis on [lo, hi] with linear extension outside.
class BernsteinBasis {
public:
    BernsteinBasis(int order, double lo, double hi);

    int order() const { return order_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    /// basis values a(y), size order+1
    VectorXd eval(double y) const;
    /// derivative basis a'(y), size order+1
    VectorXd deriv(double y) const;

private:
    VectorXd eval_inside(double y) const;
    VectorXd deriv_inside(double y) const;

    int order_;
    double lo_, hi_;
};

/// Support trimmed to empirical quantiles (type-7) at p_lo / p_hi.
std::pair<double, double> support_from_sample(const VectorXd& responses, double p_lo = 0.01,
                                              double p_hi = 0.99);

/// Monotone Bernstein transformation plus group shifts under a link density.
struct TransformationModel {
    BernsteinBasis basis;
    VectorXd theta;      // nondecreasing transformation coefficients, size M+1
    VectorXd beta;       // group shifts, size k (control = 0 reference)
    Link link = Link::Normal;
    double loglik = 0.0;
    MatrixXd covariance;     // observed-information covariance of (theta, beta)
    MatrixXd information;    // observed information of (theta, beta)
    MatrixXd scores;         // per-subject score rows, N x (M+1+k)
    std::vector<int> group_index;
    int model_df = 0;        // number of parameters M+1+k
    double gradient_norm = 0.0;
    bool converged = false;

    double transform(double y) const { return basis.eval(y).dot(theta); }
    double transform_deriv(double y) const { return basis.deriv(y).dot(theta); }
};

struct MltOptions {
    int order = 5;
    Link link = Link::Normal;
    int max_iter = 500;
    double grad_tol = 1e-6;
};

TransformationModel fit_mlt(const GroupedSample& sample, const MltOptions& opts = {});

/// Wald-type Dunnett test on the shift coefficients; df empty = asymptotic.
MaxTResult mlt_dunnett(const TransformationModel& model, std::optional<double> df,
                       Tail tail = Tail::TwoSided, double alpha = 0.05,
                       const MvtOptions& opts = {},
                       const std::vector<std::string>& labels = {});

/// Continuous outcome logistic regression: odds ratios 1/exp(beta) with
/// compatible simultaneous bounds and adjusted p-values.
struct ColrResult {
    MaxTResult wald;       // on the log-odds (shift) scale
    VectorXd odds_ratio;   // 1/exp(beta)
    VectorXd or_lower;     // simultaneous lower OR bound = 1/exp(upper beta)
    VectorXd or_upper;
};

ColrResult colr_dunnett(const GroupedSample& sample, int order = 5, Tail tail = Tail::TwoSided,
                        double alpha = 0.05, std::optional<double> df = std::nullopt,
                        const MvtOptions& opts = {});

namespace detail {
/// Log-likelihood, gradient and observed information in (theta, beta) space.
struct MltObjective {
    double loglik;
    VectorXd gradient;
    MatrixXd hessian;
};
MltObjective mlt_objective(const GroupedSample& sample, const BernsteinBasis& basis,
                           const VectorXd& theta, const VectorXd& beta, Link link,
                           bool with_hessian);
} // namespace detail

} // namespace robustmct
