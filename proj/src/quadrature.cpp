#include "robustmct/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace robustmct {
namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come
// from the first components of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                            double weight_mass) {
    const int n = static_cast<int>(diag.size());
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jacobi(i, i) = diag(i);
        if (i + 1 < n) {
            jacobi(i, i + 1) = offdiag(i);
            jacobi(i + 1, i) = offdiag(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    QuadratureRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v = es.eigenvectors()(0, i);
        rule.weights(i) = weight_mass * v * v;
    }
    return rule;
}

} // namespace

QuadratureRule gauss_legendre01(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n - 1);
    for (int i = 1; i < n; ++i) {
        const double k = static_cast<double>(i);
        off(i - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    }
    QuadratureRule rule = golub_welsch(diag, off, 2.0);
    // map from [-1,1] to [0,1]
    rule.nodes = (rule.nodes.array() + 1.0) / 2.0;
    rule.weights /= 2.0;
    return rule;
}

QuadratureRule gauss_hermite_normal(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(n - 1);
    for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(i / 2.0);
    QuadratureRule rule = golub_welsch(diag, off, std::sqrt(std::numbers::pi));
    // physicists' weight exp(-x^2) -> standard normal density
    rule.nodes *= std::numbers::sqrt2;
    rule.weights /= std::sqrt(std::numbers::pi);
    return rule;
}

} // namespace robustmct
