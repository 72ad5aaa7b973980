#include "ouc/delay.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "ouc/manifest.hpp"
#include "ouc/rng.hpp"

namespace ouc {

namespace {

// Step propagator pieces for a fixed dt: state multiplier, unit-control
// drift, and the scalar noise std (noise never leaves coordinate 0 because
// the shift block does not feed from y).
struct DelayStepper {
  Eigen::MatrixXd propagator;   // e^{A dt}
  Eigen::VectorXd unit_drift;   // int_0^dt e^{As} b_norm ds (per unit scaled control)
  double noise_sd = 0.0;

  DelayStepper(const DelayInstance& inst, double dt) {
    const int n = inst.dim();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = inst.a_matrix;
    aug.topRightCorner(n, 1) = inst.b_norm;
    const Eigen::MatrixXd e = (aug * dt).exp();
    propagator = e.topLeftCorner(n, n);
    unit_drift = e.topRightCorner(n, 1);
    const double a0 = inst.a0;
    const double var =
        inst.sigma0 * inst.sigma0 *
        (a0 == 0.0 ? dt : std::expm1(2.0 * a0 * dt) / (2.0 * a0));
    noise_sd = std::sqrt(var);
  }
};

}  // namespace

Eigen::VectorXd DelayInstance::initial_state(
    double y0, const std::function<double(double)>& past_control) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  x[0] = y0;
  // x1(xi) = int_{-d}^{xi} b1(s) u0(s - xi) ds, left-endpoint quadrature on
  // the delay grid.
  for (int i = 0; i < n_d; ++i) {
    const double xi = -d_lag + cell * i;
    double acc = 0.0;
    for (int j = 0; j < i; ++j) {
      const double s = -d_lag + cell * j;
      acc += b1[j] * past_control(s - xi) * cell;
    }
    x[1 + i] = acc;
  }
  return x;
}

DelayInstance build_delay_instance(double a0, double b0, double sigma0,
                                   double d_lag,
                                   const Eigen::VectorXd& b1_samples, int n_d,
                                   double lambda) {
  if (!(sigma0 > 0.0))
    throw std::invalid_argument("build_delay_instance: sigma0 must be > 0");
  if (n_d < 2)
    throw std::invalid_argument("build_delay_instance: need n_d >= 2");
  if (b1_samples.size() != n_d)
    throw std::invalid_argument(
        "build_delay_instance: b1 must be sampled at the n_d cell left ends");
  if (!(d_lag > 0.0))
    throw std::invalid_argument("build_delay_instance: d_lag must be > 0");
  if (!(lambda > 0.0))
    throw std::invalid_argument("build_delay_instance: lambda must be > 0");

  DelayInstance inst;
  inst.a0 = a0;
  inst.b0 = b0;
  inst.sigma0 = sigma0;
  inst.d_lag = d_lag;
  inst.n_d = n_d;
  inst.lambda = lambda;
  inst.cell = d_lag / n_d;
  inst.b1 = b1_samples;

  // |b|_H^2 = b0^2 + int |b1|^2 on the grid.
  const double norm =
      std::sqrt(b0 * b0 + inst.cell * b1_samples.squaredNorm());
  if (!(norm > 0.0))
    throw std::invalid_argument("build_delay_instance: b must not vanish");
  inst.control_scale = norm;
  inst.b_norm.resize(inst.dim());
  inst.b_norm[0] = b0 / norm;
  inst.b_norm.tail(n_d) = b1_samples / norm;

  // Upwind shift toward xi = 0 with zero inflow at xi = -d; the boundary
  // value x1(0) (last cell) feeds the y-coordinate.
  const int n = inst.dim();
  inst.a_matrix = Eigen::MatrixXd::Zero(n, n);
  inst.a_matrix(0, 0) = a0;
  inst.a_matrix(0, n - 1) = 1.0;
  const double inv = 1.0 / inst.cell;
  for (int i = 0; i < n_d; ++i) {
    inst.a_matrix(1 + i, 1 + i) = -inv;
    if (i > 0) inst.a_matrix(1 + i, i) = inv;
  }
  return inst;
}

Eigen::MatrixXd simulate_delay_mean_path(
    const DelayInstance& inst, const Eigen::VectorXd& x0,
    const std::function<double(double)>& control, double horizon, int steps) {
  const DelayStepper stepper(inst, horizon / steps);
  Eigen::MatrixXd path(steps + 1, inst.dim());
  Eigen::VectorXd x = x0;
  path.row(0) = x.transpose();
  for (int s = 0; s < steps; ++s) {
    const double t = horizon * s / steps;
    const double u = inst.control_scale * control(t);
    x = stepper.propagator * x + u * stepper.unit_drift;
    path.row(s + 1) = x.transpose();
  }
  return path;
}

Eigen::VectorXd delayed_sde_euler_mean(
    double a0, double b0, const Eigen::VectorXd& b1_samples, double d_lag,
    double y0, const std::function<double(double)>& past_control,
    const std::function<double(double)>& control, double horizon, int steps) {
  const int n_d = static_cast<int>(b1_samples.size());
  const double cell = d_lag / n_d;
  auto u_at = [&](double s) {
    return s < 0.0 ? past_control(s) : control(s);
  };
  const double dt = horizon / steps;
  Eigen::VectorXd path(steps + 1);
  double y = y0;
  path[0] = y;
  for (int s = 0; s < steps; ++s) {
    const double t = dt * s;
    double delayed = 0.0;
    for (int j = 0; j < n_d; ++j) {
      const double xi = -d_lag + cell * j;
      delayed += b1_samples[j] * u_at(t + xi) * cell;
    }
    y += dt * (a0 * y + b0 * u_at(t) + delayed);
    path[s + 1] = y;
  }
  return path;
}

McMoments delay_mc(const DelayInstance& inst, const Eigen::VectorXd& x0,
                   const std::function<double(double)>& control,
                   double horizon, int steps, int n_paths, std::uint64_t seed,
                   int dim,
                   const std::function<void(const std::vector<double>&,
                                            const Eigen::MatrixXd&,
                                            const Eigen::VectorXd&,
                                            Eigen::VectorXd&)>& functional) {
  if (n_paths < 2)
    throw std::invalid_argument("delay_mc: need at least 2 paths");
  const DelayStepper stepper(inst, horizon / steps);
  std::vector<double> times(steps + 1);
  Eigen::VectorXd controls(steps + 1);
  for (int s = 0; s <= steps; ++s) {
    times[s] = horizon * s / steps;
    controls[s] = control(std::min(times[s], horizon * (steps - 1) / steps));
  }

  // Serial accumulation (the propagator matvec dominates; path counts used
  // for the delay checks are modest).
  long n = 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd states(steps + 1, inst.dim());
  Eigen::VectorXd out(dim);
  for (int p = 0; p < n_paths; ++p) {
    Eigen::VectorXd x = x0;
    states.row(0) = x.transpose();
    for (int s = 0; s < steps; ++s) {
      CounterRng rng(seed, static_cast<std::uint64_t>(p),
                     static_cast<std::uint64_t>(s));
      x = stepper.propagator * x +
          inst.control_scale * controls[s] * stepper.unit_drift;
      x[0] += stepper.noise_sd * rng.next_normal();
      states.row(s + 1) = x.transpose();
    }
    functional(times, states, controls, out);
    ++n;
    const Eigen::VectorXd delta = out - mean;
    mean += delta / double(n);
    m2 += delta.cwiseProduct(out - mean);
  }
  McMoments mm;
  mm.n = n;
  mm.mean = mean;
  mm.std_error = (m2 / double(n - 1) / double(n)).cwiseSqrt();
  return mm;
}

VerificationReport delay_dynkin_residual(
    const DelayInstance& inst, double freq, double phase, double amplitude,
    double horizon, const Eigen::VectorXd& x0,
    const std::function<double(double)>& control, int steps, int n_paths,
    std::uint64_t seed) {
  const double lambda = inst.lambda;
  auto f = [&](double y) { return amplitude * std::cos(freq * y + phase); };
  auto fp = [&](double y) { return -amplitude * freq * std::sin(freq * y + phase); };
  auto fpp = [&](double y) {
    return -amplitude * freq * freq * std::cos(freq * y + phase);
  };
  const double f_at_x = f(x0[0]);
  const int last = inst.dim() - 1;

  const McMoments mm = delay_mc(
      inst, x0, control, horizon, steps, n_paths, seed, 2,
      [&](const std::vector<double>& times, const Eigen::MatrixXd& states,
          const Eigen::VectorXd& controls, Eigen::VectorXd& out) {
        const int nt = static_cast<int>(times.size());
        Eigen::VectorXd psi(nt);
        for (int i = 0; i < nt; ++i) {
          const double y = states(i, 0);
          const double drift_y = inst.a0 * y + states(i, last);
          const double gen = 0.5 * inst.sigma0 * inst.sigma0 * fpp(y) +
                             drift_y * fp(y);
          const double dg = fp(y) * inst.b_norm[0];  // <Df, b> on the grid
          psi[i] = gen - lambda * f(y) +
                   inst.control_scale * controls[i] * dg;
        }
        const double lhs = std::exp(-lambda * horizon) * f(states(nt - 1, 0));
        out[0] = lhs - f_at_x - discounted_path_integral(lambda, times, psi);
        out[1] =
            lhs - f_at_x - discounted_path_integral_coarse(lambda, times, psi);
      });

  VerificationReport rep;
  rep.check_id = "dynkin";
  rep.estimate = mm.mean[0];
  rep.standard_error = mm.std_error[0];
  const double quad = std::abs(mm.mean[0] - mm.mean[1]) / 3.0 +
                      1e-13 * (1.0 + std::abs(amplitude));
  rep.pass = std::abs(rep.estimate) <= 3.0 * rep.standard_error + quad;
  {
    std::ostringstream extra;
    extra << "delay f=cos(" << freq << " y + " << phase << ") T=" << horizon
          << " paths=" << n_paths << " seed=" << seed << " quad=" << quad;
    rep.inputs_digest = extra.str();
  }
  return rep;
}

JEstimate delay_estimate_J(const DelayInstance& inst,
                           const std::function<double(double)>& l0,
                           double l2_weight, const Eigen::VectorXd& x0,
                           const std::function<double(double)>& control,
                           double horizon, int steps, int n_paths,
                           std::uint64_t seed) {
  const double lambda = inst.lambda;
  const McMoments mm = delay_mc(
      inst, x0, control, horizon, steps, n_paths, seed, 2,
      [&](const std::vector<double>& times, const Eigen::MatrixXd& states,
          const Eigen::VectorXd& controls, Eigen::VectorXd& out) {
        const int nt = static_cast<int>(times.size());
        Eigen::VectorXd psi(nt);
        for (int i = 0; i < nt; ++i)
          psi[i] = l0(states(i, 0)) +
                   0.5 * l2_weight * controls[i] * controls[i];
        out[0] = discounted_path_integral(lambda, times, psi);
        out[1] = discounted_path_integral_coarse(lambda, times, psi);
      });
  JEstimate est;
  est.value = mm.mean[0];
  est.std_error = mm.std_error[0];
  est.quadrature_estimate = std::abs(mm.mean[0] - mm.mean[1]) / 3.0;
  return est;
}

double delay_shift_mass(const DelayInstance& inst, const Eigen::VectorXd& x,
                        double absorbed) {
  return inst.cell * x.tail(inst.n_d).sum() + absorbed;
}

}  // namespace ouc
