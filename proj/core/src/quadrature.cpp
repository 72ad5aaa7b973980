#include "ouc/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace ouc {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights come from the first components
// of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd& off_diag, double mu0) {
  const int n = static_cast<int>(off_diag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = off_diag[i];
    jacobi(i + 1, i) = off_diag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  if (n == 1) return {Eigen::VectorXd::Zero(1),
                      Eigen::VectorXd::Constant(1, std::sqrt(M_PI))};
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off[i - 1] = std::sqrt(0.5 * i);
  return golub_welsch(off, std::sqrt(M_PI));
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  if (n == 1) return {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)};
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
  return golub_welsch(off, 2.0);
}

QuadratureRule gauss_legendre_on(int n, double a, double b) {
  QuadratureRule base = gauss_legendre(n);
  QuadratureRule rule;
  rule.nodes = 0.5 * (b - a) * base.nodes.array() + 0.5 * (a + b);
  rule.weights = 0.5 * (b - a) * base.weights;
  return rule;
}

QuadratureRule graded_rule(double tmax, int levels, int points_per_level) {
  if (tmax <= 0.0) throw std::invalid_argument("graded_rule: tmax must be > 0");
  QuadratureRule base = gauss_legendre(points_per_level);
  const int total = levels * points_per_level;
  QuadratureRule rule;
  rule.nodes.resize(total);
  rule.weights.resize(total);
  double hi = tmax;
  int at = 0;
  for (int j = 0; j < levels; ++j) {
    const double lo = 0.5 * hi;
    for (int i = 0; i < points_per_level; ++i, ++at) {
      rule.nodes[at] = 0.5 * (hi - lo) * base.nodes[i] + 0.5 * (lo + hi);
      rule.weights[at] = 0.5 * (hi - lo) * base.weights[i];
    }
    hi = lo;
  }
  return rule;
}

}  // namespace ouc
