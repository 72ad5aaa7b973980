#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ouc/dynamics.hpp"
#include "ouc/fields.hpp"
#include "ouc/spectral_model.hpp"

namespace ouc {

// Evaluation scheme for P_t^{(k)}[f](x) = E f(X^{(k)}(t;x)).
struct SemigroupScheme {
  enum class Kind { kClosedForm, kGaussHermite, kMonteCarlo };
  Kind kind = Kind::kGaussHermite;
  int order = 16;            // Gauss-Hermite order per support mode
  int n_samples = 10000;     // Monte Carlo sample count
  std::uint64_t seed = 0;

  static SemigroupScheme closed_form() {
    return {Kind::kClosedForm, 0, 0, 0};
  }
  static SemigroupScheme gauss_hermite(int order = 16) {
    return {Kind::kGaussHermite, order, 0, 0};
  }
  static SemigroupScheme monte_carlo(int n, std::uint64_t seed) {
    return {Kind::kMonteCarlo, 0, n, seed};
  }
};

// K-vector of the constant drift produced by holding the control u: L u.
Eigen::VectorXd drift_from_control(const SpectralModel& model,
                                   const Eigen::VectorXd& u);

// Law of X^{(k)}(t;x): mean_j = e^{-mu_j t} x_j + g_j k_j phi(mu_j, t),
// covariance diag Q_t.
GaussianLaw transition_law(const SpectralModel& model,
                           const Eigen::VectorXd& k_drift,
                           const Eigen::VectorXd& x, double t);

// P_t^{(k)}[f](x).  The closed-form scheme is available for trig and
// constant cylinders only; Gauss-Hermite requires a support of at most
// 3 modes.
double apply_semigroup(const SpectralModel& model,
                       const Eigen::VectorXd& k_drift, const ScalarField& f,
                       double t, const Eigen::VectorXd& x,
                       const SemigroupScheme& scheme);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
// Monte Carlo variant reporting the standard error.
McEstimate apply_semigroup_mc(const SpectralModel& model,
                              const Eigen::VectorXd& k_drift,
                              const ScalarField& f, double t,
                              const Eigen::VectorXd& x, int n_samples,
                              std::uint64_t seed);

// Exact image of a trig cylinder under P_t^{(k)}: again a trig cylinder,
// with direction e^{tA} a, amplitude scaled by exp(-<Q_t a, a>/2) and phase
// shifted by the drift mean.
CylinderFunction propagate_trig(const SpectralModel& model,
                                const CylinderFunction& f,
                                const Eigen::VectorXd& k_drift, double t);

// Generator on smooth cylinders:
//   A^{(k)}[f](x) = 1/2 sum_j sigma_j^2 (D^2 f)_{jj}(x)
//                   + sum_j (-mu_j x_j) (Df)_j(x) + <D^G f(x), k>_K.
double apply_generator(const SpectralModel& model,
                       const Eigen::VectorXd& k_drift,
                       const CylinderFunction& f, const Eigen::VectorXd& x);

struct ResolventOptions {
  int time_levels = 28;      // geometric subintervals of the Laplace quadrature
  int gl_points = 8;         // Gauss-Legendre points per subinterval
  int gh_order = 16;         // spatial scheme for non-trig fields
  double tail_tol = 1e-9;    // target analytic tail mass
};
struct ResolventResult {
  double value = 0.0;
  double error_budget = 0.0;  // analytic tail + uncovered-origin bound
  double t_max = 0.0;
};
// R^{(k)}_lambda[g](x) = int_0^inf e^{-lambda s} P^{(k)}_s[g](x) ds by
// composite Gauss-Legendre on exponentially graded subintervals; the
// truncation tail |g|_inf e^{-lambda T}/lambda enters the reported budget.
ResolventResult resolvent(const SpectralModel& model, double lambda,
                          const ScalarField& g, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& k_drift,
                          const ResolventOptions& opts = {});

struct GGradientEstimate {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;
};
// Monte Carlo G-gradient of the uncontrolled semigroup through the Gaussian
// integration-by-parts weight
//   D^G P_t[f](x)_j = E[ f(X) e^{-mu_j t} g_j (X_j - mean_j) / Q_t(j) ],
// with f centered at the mean as a control variate.  Requires t > 0 and a
// model that passes check_smoothing.
GGradientEstimate g_gradient_semigroup(const SpectralModel& model,
                                       const ScalarField& f, double t,
                                       const Eigen::VectorXd& x, int n_samples,
                                       std::uint64_t seed);

struct AuditResult {
  double residual = 0.0;
  double std_error = 0.0;  // 0 for deterministic schemes
};
// |P_{s+t} f(x) - P_s[P_t f](x)|, exact composition for trig cylinders,
// nested Monte Carlo (independent streams) otherwise.
AuditResult semigroup_property_audit(const SpectralModel& model,
                                     const CylinderFunction& f, double s,
                                     double t, const Eigen::VectorXd& x,
                                     const SemigroupScheme& scheme);

}  // namespace ouc
