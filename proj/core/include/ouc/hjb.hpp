#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ouc/control.hpp"
#include "ouc/fields.hpp"
#include "ouc/spectral_model.hpp"

namespace ouc {

// Running cost l(x, u) = l1(x) + l2(u) with l1 bounded continuous on the
// leading modes and l2(u) = (l2_weight/2) |u|^2 on the admissible box
// (an optional general convex l2 callable can override the quadratic for
// evaluation; the closed-form minimizers then fall back to a brute-force
// search, only supported for control dimension <= 2).
struct CostSpec {
  std::function<double(const Eigen::VectorXd&)> l1;
  std::vector<int> l1_support;   // modes l1 reads
  double l1_inf = 0.0;
  double l1_sup = 0.0;
  double l2_weight = 1.0;
  Box control_set;
  std::function<double(const Eigen::VectorXd&)> l2_override;

  double l2(const Eigen::VectorXd& u) const {
    return l2_override ? l2_override(u) : 0.5 * l2_weight * u.squaredNorm();
  }
  double running_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return l1(x) + l2(u);
  }
  // Minimum of l2 over the box (0 for the quadratic when 0 is admissible).
  double l2_min() const;
};

// Bounded smooth running cost l1(x) = 1 - exp(-<w, x>^2), the shipped
// example cost.
CostSpec make_gauss_well_cost(const Eigen::VectorXd& weights, double l2_weight,
                              Box control_set);

// Hamiltonian integrand F_{0,CV}(x, q; u) = <L u, q>_K + l(x, u).
// u must be admissible.
double hamiltonian_fcv(const CostSpec& cost, const SpectralModel& model,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& u);

// Modified Hamiltonian F_0(x, q) = inf_{u in Lambda} F_{0,CV}(x, q; u).
// Closed form for the separable quadratic l2 on a box (coordinatewise
// clamped stationary point; for l2_weight = 0 a linear program on the box
// with the lexicographically smallest minimizer).  Throws when the infimum
// is -infinity (unbounded box without coercive l2).
double hamiltonian_f0(const CostSpec& cost, const SpectralModel& model,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& q);

// The minimizing control of F_{0,CV}(x, D^G v(x); u); unique for
// l2_weight > 0, lexicographically smallest on ties.
Eigen::VectorXd argmin_fcv(const CostSpec& cost, const SpectralModel& model,
                           const Eigen::VectorXd& q);
Eigen::VectorXd feedback_map(const CostSpec& cost, const SpectralModel& model,
                             const ValueField& v, const Eigen::VectorXd& x);

// Lipschitz constant of q -> F_0(x, q): sup_{u in Lambda} |L u|_K
// (maximum over box vertices).  Requires a bounded box.
double f0_lipschitz_constant(const CostSpec& cost, const SpectralModel& model);

struct GridSpec {
  int m_lead = 2;
  int nodes_per_dim = 81;
  double half_width = 0.0;  // <= 0: auto, 5 * max_k sqrt(Var_k at t = 2/lambda)
};

struct SolveOptions {
  double tol = 1e-5;      // sup-norm stopping threshold on (v, D^G v)
  int max_iter = 80;
  int gh_order = 12;      // Gauss-Hermite order per leading mode
  int time_levels = 22;   // geometric time subintervals
  int gl_points = 6;      // Gauss-Legendre points per subinterval
};

struct SolveInfo {
  double rho_analytic = 0.0;    // C_F0 * int e^{-lambda s} |Gamma_G(s)| ds
  double rho_measured = 0.0;    // max successive-change ratio
  int iterations = 0;
  double final_change = 0.0;
  double posterior_residual = 0.0;  // sup |T v - v| with refined quadrature
  double error_budget = 0.0;        // posterior/(1-rho) + tails
  double tail_bound = 0.0;
  double c_f0 = 0.0;
  double f0_sup = 0.0;
};

struct HjbSolution {
  ValueField value;
  SolveInfo info;
};

// Mild-solution fixed point
//   v(x) = int_0^inf e^{-lambda s} P_s^{(0)}[F_0(., D^G v(.))](x) ds
// iterated on a cylinder grid over the leading modes, with the G-gradient
// propagated through the same quadrature by the Gaussian
// integration-by-parts weights.  Throws when the contraction estimate is
// >= 1 (lambda below the solvable threshold) or when max_iter is exceeded.
HjbSolution solve_mild_hjb(const SpectralModel& model, const CostSpec& cost,
                           const GridSpec& grid, const SolveOptions& opts = {});

// Differential-form residual lambda v(x) - A^{(0)}v(x) - F_0(x, D^G v(x))
// at an interior grid point, with A^{(0)}v approximated by the
// Richardson-extrapolated semigroup difference quotient
// 2 (P_{h/2} v - v)/(h/2)/2 ... i.e. 2 r(h/2) - r(h).
double strict_form_residual(const SpectralModel& model, const CostSpec& cost,
                            const ValueField& v, const Eigen::VectorXd& x,
                            double h = 0.1, int gh_order = 24);

// Stationary feedback policy closing the loop through feedback_map.
ControlProcess make_feedback_control(const CostSpec& cost,
                                     const SpectralModel& model,
                                     const ValueField& v);

// Auto half-width used when GridSpec::half_width <= 0.
double default_half_width(const SpectralModel& model, int m_lead);

}  // namespace ouc
