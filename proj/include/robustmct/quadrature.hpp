#pragma once

#include <Eigen/Dense>

namespace robustmct {

struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Gauss-Legendre rule on [0, 1].
QuadratureRule gauss_legendre01(int n);

/// Gauss-Hermite rule scaled so that sum w_i f(x_i) ~ E[f(Z)], Z ~ N(0,1).
QuadratureRule gauss_hermite_normal(int n);

} // namespace robustmct
