#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ouc {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Gauss-Hermite rule for integrals against exp(-z^2) dz (physicists'
// convention).  E[f(X)] with X ~ N(m, s^2) is
//   pi^{-1/2} * sum_i w_i f(m + sqrt(2) s z_i).
QuadratureRule gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre_on(int n, double a, double b);

// Nodes/weights for int_0^tmax f(s) ds with f possibly blowing up like
// s^{-r}, r < 1, at the origin: composite Gauss-Legendre on `levels`
// geometrically shrinking subintervals [tmax 2^{-j-1}, tmax 2^{-j}].
// The leftover interval [0, tmax 2^{-levels}] is not covered; its
// contribution must be bounded by the caller.
QuadratureRule graded_rule(double tmax, int levels, int points_per_level);

}  // namespace ouc
