#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ouc/hjb.hpp"
#include "ouc/verify.hpp"

namespace ouc {

// Scalar SDE with distributed delay in the control,
//   dy = [a0 y + b0 u(t) + int_{-d}^0 b1(s) u(t+s) ds] dt + sigma0 dW,
// reformulated on the product space R x L^2([-d,0]) with
//   A x = (a0 x0 + x1(0), -x1'),  G(u) = u b,  sigma = (sigma0, 0),
// and discretized by an upwind shift on a uniform delay grid of n_d cells.
// b is stored normalized to |b|_H = 1; control_scale carries the original
// norm so that control_scale * u * b reproduces the user's drift.
struct DelayInstance {
  double a0 = 0.0, b0 = 0.0, sigma0 = 1.0;
  double d_lag = 1.0;
  int n_d = 2;
  double lambda = 1.0;
  double cell = 0.0;            // delay grid spacing d_lag / n_d
  double control_scale = 1.0;   // original |b|_H
  Eigen::VectorXd b1;           // original kernel samples at cell left ends
  Eigen::MatrixXd a_matrix;     // (n_d + 1)^2 product-space generator
  Eigen::VectorXd b_norm;       // normalized (b0, b1) on the grid

  int dim() const { return n_d + 1; }

  // Product-space initial state from y0 and the past control u0 on [-d, 0).
  Eigen::VectorXd initial_state(
      double y0, const std::function<double(double)>& past_control) const;
};

DelayInstance build_delay_instance(double a0, double b0, double sigma0,
                                   double d_lag,
                                   const Eigen::VectorXd& b1_samples, int n_d,
                                   double lambda);

// Exact-in-law transition stepping of the discretized product-space system
// (matrix exponential propagator; the noise stays in coordinate 0, so the
// step covariance is the scalar OU variance).  The control is an open-loop
// deterministic function of time, held constant on each step.
struct DelayPathEnsembleStats {
  Eigen::VectorXd mean_y;  // ensemble mean of coordinate 0 per grid time
  std::vector<double> times;
};
Eigen::MatrixXd simulate_delay_mean_path(
    const DelayInstance& inst, const Eigen::VectorXd& x0,
    const std::function<double(double)>& control, double horizon, int steps);

// Direct Euler simulation of the original delayed SDE (independent oracle);
// returns the deterministic mean path of y on the same grid (noise averages
// out of the mean, so sigma is not used here).
Eigen::VectorXd delayed_sde_euler_mean(
    double a0, double b0, const Eigen::VectorXd& b1_samples, double d_lag,
    double y0, const std::function<double(double)>& past_control,
    const std::function<double(double)>& control, double horizon, int steps);

// Monte Carlo statistics of a per-path functional of the product-space
// simulation (dim-valued), chunk-deterministic like mc_over_paths.
McMoments delay_mc(const DelayInstance& inst, const Eigen::VectorXd& x0,
                   const std::function<double(double)>& control,
                   double horizon, int steps, int n_paths, std::uint64_t seed,
                   int dim,
                   const std::function<void(const std::vector<double>&,
                                            const Eigen::MatrixXd&,
                                            const Eigen::VectorXd&,
                                            Eigen::VectorXd&)>& functional);
// functional args: times, states ((steps+1) x dim), control values per step
// (steps+1), output.

// Generalized Dynkin residual for a trig cylinder in the y-coordinate,
// f = amplitude cos(freq x0 + phase), on the discretized product system.
VerificationReport delay_dynkin_residual(
    const DelayInstance& inst, double freq, double phase, double amplitude,
    double horizon, const Eigen::VectorXd& x0,
    const std::function<double(double)>& control, int steps, int n_paths,
    std::uint64_t seed);

// Discounted cost estimate for l(y, u) = l0(y) + 0.5 w u^2.
JEstimate delay_estimate_J(const DelayInstance& inst,
                           const std::function<double(double)>& l0,
                           double l2_weight, const Eigen::VectorXd& x0,
                           const std::function<double(double)>& control,
                           double horizon, int steps, int n_paths,
                           std::uint64_t seed);

// Conserved quantity of the upwind shift: cell mass plus the flux absorbed
// through the x1(0) boundary; used by the discretization tests.
double delay_shift_mass(const DelayInstance& inst, const Eigen::VectorXd& x,
                        double absorbed);

}  // namespace ouc
