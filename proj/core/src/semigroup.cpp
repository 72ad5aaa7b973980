#include "ouc/semigroup.hpp"

#include <cmath>
#include <stdexcept>

#include "ouc/quadrature.hpp"
#include "ouc/rng.hpp"

namespace ouc {

namespace {

double phi(double a, double t) {
  if (a == 0.0) return t;
  return -std::expm1(-a * t) / a;
}

// Tensor Gauss-Hermite expectation of f over its support modes, all other
// coordinates frozen at x.
double gh_expectation(const ScalarField& f, const Eigen::VectorXd& x,
                      const GaussianLaw& law, int order) {
  const auto& support = f.support();
  const int dims = static_cast<int>(support.size());
  if (dims == 0) return f(x);
  if (dims > 3)
    throw std::invalid_argument(
        "apply_semigroup: gauss-hermite scheme limited to <= 3 support modes");
  const QuadratureRule gh = gauss_hermite(order);
  const double norm = std::pow(M_PI, -0.5 * dims);
  Eigen::VectorXd y = x;
  std::vector<int> idx(dims, 0);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int j = 0; j < dims; ++j) {
      const int k = support[j];
      y[k] = law.mean[k] +
             std::sqrt(2.0 * law.cov_diag[k]) * gh.nodes[idx[j]];
      w *= gh.weights[idx[j]];
    }
    total += w * f(y);
    int j = 0;
    for (; j < dims; ++j) {
      if (++idx[j] < gh.nodes.size()) break;
      idx[j] = 0;
    }
    if (j == dims) break;
  }
  return norm * total;
}

}  // namespace

Eigen::VectorXd drift_from_control(const SpectralModel& model,
                                   const Eigen::VectorXd& u) {
  return model.control_map * u;
}

GaussianLaw transition_law(const SpectralModel& model,
                           const Eigen::VectorXd& k_drift,
                           const Eigen::VectorXd& x, double t) {
  if (t < 0.0) throw std::invalid_argument("transition_law: t must be >= 0");
  const int n = model.n_modes();
  if (k_drift.size() != n || x.size() != n)
    throw std::invalid_argument("transition_law: dimension mismatch");
  GaussianLaw law;
  law.mean.resize(n);
  for (int j = 0; j < n; ++j)
    law.mean[j] = std::exp(-model.mu[j] * t) * x[j] +
                  model.g_diag[j] * k_drift[j] * phi(model.mu[j], t);
  law.cov_diag = covariance_qt(model, t);
  return law;
}

CylinderFunction propagate_trig(const SpectralModel& model,
                                const CylinderFunction& f,
                                const Eigen::VectorXd& k_drift, double t) {
  if (f.kind() != CylinderFunction::Kind::kTrig &&
      f.kind() != CylinderFunction::Kind::kConstant)
    throw std::invalid_argument("propagate_trig: trig cylinders only");
  if (f.kind() == CylinderFunction::Kind::kConstant) return f;
  const Eigen::VectorXd& a = f.direction();
  const Eigen::VectorXd qt = covariance_qt(model, t);
  double quad = 0.0, shift = 0.0;
  Eigen::VectorXd a_out(a.size());
  for (int j = 0; j < a.size(); ++j) {
    quad += qt[j] * a[j] * a[j];
    shift += a[j] * model.g_diag[j] * k_drift[j] * phi(model.mu[j], t);
    a_out[j] = std::exp(-model.mu[j] * t) * a[j];
  }
  return CylinderFunction::trig(a_out, f.phase() + shift,
                                f.amplitude() * std::exp(-0.5 * quad));
}

double apply_semigroup(const SpectralModel& model,
                       const Eigen::VectorXd& k_drift, const ScalarField& f,
                       double t, const Eigen::VectorXd& x,
                       const SemigroupScheme& scheme) {
  switch (scheme.kind) {
    case SemigroupScheme::Kind::kClosedForm: {
      const CylinderFunction* cyl = f.as_cylinder();
      if (cyl == nullptr ||
          (cyl->kind() != CylinderFunction::Kind::kTrig &&
           cyl->kind() != CylinderFunction::Kind::kConstant))
        throw std::invalid_argument(
            "apply_semigroup: closed form requires a trig cylinder");
      return propagate_trig(model, *cyl, k_drift, t)(x);
    }
    case SemigroupScheme::Kind::kGaussHermite: {
      const GaussianLaw law = transition_law(model, k_drift, x, t);
      return gh_expectation(f, x, law, scheme.order);
    }
    case SemigroupScheme::Kind::kMonteCarlo:
      return apply_semigroup_mc(model, k_drift, f, t, x, scheme.n_samples,
                                scheme.seed)
          .value;
  }
  return 0.0;
}

McEstimate apply_semigroup_mc(const SpectralModel& model,
                              const Eigen::VectorXd& k_drift,
                              const ScalarField& f, double t,
                              const Eigen::VectorXd& x, int n_samples,
                              std::uint64_t seed) {
  if (n_samples < 2)
    throw std::invalid_argument("apply_semigroup_mc: need >= 2 samples");
  const GaussianLaw law = transition_law(model, k_drift, x, t);
  const auto& support = f.support();
  Eigen::VectorXd y = x;
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), 0x5E6u);
    for (int k : support)
      y[k] = law.mean[k] + std::sqrt(law.cov_diag[k]) * rng.next_normal();
    const double v = f(y);
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  McEstimate est;
  est.value = mean;
  est.std_error = std::sqrt(m2 / (double(n_samples) - 1.0) / n_samples);
  return est;
}

double apply_generator(const SpectralModel& model,
                       const Eigen::VectorXd& k_drift,
                       const CylinderFunction& f, const Eigen::VectorXd& x) {
  if (f.direction().size() != model.n_modes())
    throw std::invalid_argument(
        "apply_generator: cylinder direction outside the truncation");
  const Eigen::VectorXd grad = f.gradient(x);
  const Eigen::VectorXd hess = f.hessian_diag(x);
  double out = 0.0;
  for (int j = 0; j < model.n_modes(); ++j) {
    const double s2 = model.sigma_diag[j] * model.sigma_diag[j];
    out += 0.5 * s2 * hess[j] - model.mu[j] * x[j] * grad[j];
  }
  out += f.g_gradient(model, x).dot(k_drift);
  return out;
}

ResolventResult resolvent(const SpectralModel& model, double lambda,
                          const ScalarField& g, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& k_drift,
                          const ResolventOptions& opts) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("resolvent: lambda must be > 0");
  const double sup = g.sup_norm();
  double t_max = std::max(10.0 / lambda, 10.0 * model.slowest_timescale());
  if (sup > 0.0) {
    const double needed =
        std::log(std::max(1.0, sup / (lambda * opts.tail_tol))) / lambda;
    t_max = std::max(t_max, needed);
  }

  const CylinderFunction* cyl = g.as_cylinder();
  const bool closed = cyl != nullptr &&
                      (cyl->kind() == CylinderFunction::Kind::kTrig ||
                       cyl->kind() == CylinderFunction::Kind::kConstant);
  const SemigroupScheme scheme = closed
                                     ? SemigroupScheme::closed_form()
                                     : SemigroupScheme::gauss_hermite(opts.gh_order);

  const QuadratureRule rule =
      graded_rule(t_max, opts.time_levels, opts.gl_points);
  double value = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    const double s = rule.nodes[i];
    value += rule.weights[i] * std::exp(-lambda * s) *
             apply_semigroup(model, k_drift, g, s, x, scheme);
  }

  ResolventResult res;
  res.value = value;
  res.t_max = t_max;
  const double origin_gap = t_max * std::pow(0.5, opts.time_levels);
  res.error_budget =
      sup * std::exp(-lambda * t_max) / lambda + sup * origin_gap;
  return res;
}

GGradientEstimate g_gradient_semigroup(const SpectralModel& model,
                                       const ScalarField& f, double t,
                                       const Eigen::VectorXd& x, int n_samples,
                                       std::uint64_t seed) {
  if (!(t > 0.0))
    throw std::invalid_argument(
        "g_gradient_semigroup: smoothing representation undefined at t=0");
  if (n_samples < 2)
    throw std::invalid_argument("g_gradient_semigroup: need >= 2 samples");
  const ConditionReport smoothing = check_smoothing(model);
  if (!smoothing.satisfied)
    throw std::invalid_argument(
        "g_gradient_semigroup: model failed the smoothing audit (H2)");

  const int n = model.n_modes();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const GaussianLaw law = transition_law(model, zero, x, t);
  const double f_at_mean = f(law.mean);

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y(n), weight(n);
  for (int i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), 0x6D1u);
    for (int k = 0; k < n; ++k) {
      const double z = rng.next_normal();
      y[k] = law.mean[k] + std::sqrt(law.cov_diag[k]) * z;
      weight[k] = std::exp(-model.mu[k] * t) * model.g_diag[k] *
                  (y[k] - law.mean[k]) / law.cov_diag[k];
    }
    const double fv = f(y) - f_at_mean;  // control variate, E[weight] = 0
    for (int k = 0; k < n; ++k) {
      const double v = fv * weight[k];
      const double delta = v - mean[k];
      mean[k] += delta / (i + 1);
      m2[k] += delta * (v - mean[k]);
    }
  }
  GGradientEstimate est;
  est.value = mean;
  est.std_error =
      (m2 / (double(n_samples) - 1.0) / n_samples).cwiseSqrt();
  return est;
}

AuditResult semigroup_property_audit(const SpectralModel& model,
                                     const CylinderFunction& f, double s,
                                     double t, const Eigen::VectorXd& x,
                                     const SemigroupScheme& scheme) {
  if (s < 0.0 || t < 0.0)
    throw std::invalid_argument("semigroup_property_audit: s, t must be >= 0");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_modes());
  AuditResult out;
  if (scheme.kind != SemigroupScheme::Kind::kMonteCarlo) {
    const double lhs = propagate_trig(model, f, zero, s + t)(x);
    const double rhs =
        propagate_trig(model, propagate_trig(model, f, zero, t), zero, s)(x);
    out.residual = std::abs(lhs - rhs);
    return out;
  }

  // Nested Monte Carlo with independent streams.
  const int n_outer = scheme.n_samples;
  const int n_inner = std::max(64, scheme.n_samples / 64);
  const McEstimate lhs = apply_semigroup_mc(model, zero, f, s + t, x,
                                            scheme.n_samples, scheme.seed);
  const GaussianLaw outer_law = transition_law(model, zero, x, s);
  double mean = 0.0, m2 = 0.0;
  Eigen::VectorXd y = x;
  for (int i = 0; i < n_outer; ++i) {
    CounterRng rng(scheme.seed ^ 0xA5A5A5A5ull, static_cast<std::uint64_t>(i),
                   1);
    for (int k = 0; k < model.n_modes(); ++k)
      y[k] = outer_law.mean[k] +
             std::sqrt(outer_law.cov_diag[k]) * rng.next_normal();
    const double inner =
        apply_semigroup_mc(model, zero, f, t, y, n_inner,
                           scheme.seed + 7919 * (i + 1))
            .value;
    const double delta = inner - mean;
    mean += delta / (i + 1);
    m2 += delta * (inner - mean);
  }
  const double rhs_se = std::sqrt(m2 / (double(n_outer) - 1.0) / n_outer);
  out.residual = std::abs(lhs.value - mean);
  out.std_error = std::sqrt(lhs.std_error * lhs.std_error + rhs_se * rhs_se);
  return out;
}

}  // namespace ouc
