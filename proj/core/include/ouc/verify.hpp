#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ouc/control.hpp"
#include "ouc/dynamics.hpp"
#include "ouc/fields.hpp"
#include "ouc/hjb.hpp"
#include "ouc/spectral_model.hpp"

namespace ouc {

struct VerificationReport {
  std::string check_id;  // dynkin | fundamental-identity | value-dominance |
                         // feedback-optimality
  double estimate = 0.0;
  double standard_error = 0.0;
  bool pass = false;
  std::string inputs_digest;
};

// Sample mean and standard error of a vector-valued per-path functional,
// accumulated per path chunk and merged in chunk order so the totals are
// schedule-independent.
struct McMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  long n = 0;
};
McMoments mc_over_paths(
    const SpectralModel& model, const Eigen::VectorXd& x,
    const ControlProcess& control, const std::vector<double>& grid,
    int n_paths, std::uint64_t seed, int dim,
    const std::function<void(const PathView&, Eigen::VectorXd&)>& functional);

// Time integral int_0^T e^{-lambda t} psi(t) dt with psi piecewise linear
// through the sampled values: the discount factor is integrated exactly
// against each linear piece, so constant integrands incur no quadrature
// error at all.
double discounted_path_integral(double lambda, const std::vector<double>& t,
                                const Eigen::VectorXd& psi);
// Same on the half-resolution grid (every other sample) for a quadrature
// error estimate.
double discounted_path_integral_coarse(double lambda,
                                       const std::vector<double>& t,
                                       const Eigen::VectorXd& psi);

struct JEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::optional<double> tail_bound;  // |J - J_T|; empty when l is unbounded
  double quadrature_estimate = 0.0;  // |full - half resolution| / 3
};

// Monte Carlo discounted cost E int_0^T e^{-lambda t} l(X_t, u_t) dt along
// exact-transition paths, discount-weighted trapezoid in time.
JEstimate estimate_J(const SpectralModel& model, const CostSpec& cost,
                     const Eigen::VectorXd& x, const ControlProcess& control,
                     double horizon, int steps, int n_paths,
                     std::uint64_t seed);

// Residual of the generalized Dynkin identity
//   E[e^{-lambda T} f(X_T)] - f(x)
//     - E int_0^T e^{-lambda t} [(A - lambda) f(X_t) + <L u_t, D^G f(X_t)>] dt
// with both sides on common paths; pass iff
// |estimate| <= 3 SE + time-quadrature estimate.
VerificationReport dynkin_residual(const SpectralModel& model,
                                   const CylinderFunction& f, double lambda,
                                   double horizon, const Eigen::VectorXd& x,
                                   const ControlProcess& control, int steps,
                                   int n_paths, std::uint64_t seed);

struct FundamentalIdentityResult {
  VerificationReport report;       // residual v(x) - J - correction
  double correction = 0.0;         // E int e^{-lambda t}(F0 - F_CV) dt (<= 0)
  double correction_std_error = 0.0;
  double j_value = 0.0;
  double j_std_error = 0.0;
};

// Paired test of v(x) = J(x;u) + E int e^{-lambda t}(F0 - F_{0,CV}(u_t)) dt.
FundamentalIdentityResult fundamental_identity_residual(
    const SpectralModel& model, const CostSpec& cost, const ValueField& v,
    const Eigen::VectorXd& x, const ControlProcess& control, double horizon,
    int steps, int n_paths, std::uint64_t seed, double solver_budget = 0.0);

struct VerificationBudget {
  double horizon = 2.0;
  int steps = 256;
  int n_paths = 20000;
  std::uint64_t seed = 1;
  double solver_budget = 0.0;  // sup-norm error budget of the solved v
};

// Verification-theorem checks: value dominance v(x) <= J(x;u) for each
// candidate control, and |v(x) - J(x; u_phi)| small for the feedback
// policy synthesized from v.
std::vector<VerificationReport> verification_report(
    const SpectralModel& model, const CostSpec& cost, const ValueField& v,
    const Eigen::VectorXd& x, const std::vector<ControlProcess>& candidates,
    const ControlProcess& feedback_policy, const VerificationBudget& budget);

}  // namespace ouc
