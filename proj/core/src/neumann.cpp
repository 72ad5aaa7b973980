#include "ouc/neumann.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "ouc/dynamics.hpp"

namespace ouc {

namespace {

double basis_at_zero(int k) {
  return k == 0 ? 1.0 / std::sqrt(M_PI) : std::sqrt(2.0 / M_PI);
}

double basis_at_pi(int k) {
  return k == 0 ? 1.0 / std::sqrt(M_PI)
                : std::sqrt(2.0 / M_PI) * (k % 2 == 0 ? 1.0 : -1.0);
}

Eigen::VectorXd log_grid(double lo, double hi, int n) {
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i)
    t[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
  return t;
}

}  // namespace

Eigen::VectorXd neumann_map_1d(double delta, double alpha_0, double alpha_pi,
                               int n_modes) {
  if (!(delta > 0.0))
    throw std::invalid_argument("neumann_map_1d: delta must be > 0");
  Eigen::VectorXd coeff(n_modes);
  for (int k = 0; k < n_modes; ++k) {
    const double mu = double(k) * k;
    coeff[k] =
        (alpha_0 * basis_at_zero(k) + alpha_pi * basis_at_pi(k)) / (delta + mu);
  }
  return coeff;
}

std::vector<std::pair<int, int>> square_mode_table(int n_modes) {
  // Frequencies up to a band wide enough to cover n_modes entries.
  int band = 2;
  while ((band + 1) * (band + 1) < 2 * n_modes + 4) ++band;
  std::vector<std::pair<int, int>> all;
  for (int i = 0; i <= band; ++i)
    for (int j = 0; j <= band; ++j) all.emplace_back(i, j);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    const int ma = a.first * a.first + a.second * a.second;
    const int mb = b.first * b.first + b.second * b.second;
    if (ma != mb) return ma < mb;
    return a < b;
  });
  all.resize(n_modes);
  return all;
}

NeumannInstance build_neumann_instance(const NeumannParams& params,
                                       CostSpec cost) {
  const int d = params.spatial_dim;
  const int n = params.n_modes;
  if (d != 1 && d != 2) {
    std::ostringstream msg;
    msg << "build_neumann_instance: theta window (1/2 - 1/d, 1/(2d)) is empty "
           "for d = "
        << d << "; the joint trace/smoothing conditions hold only for d <= 2";
    throw std::invalid_argument(msg.str());
  }
  if (!(params.epsilon > 0.0 && params.epsilon < 0.75))
    throw std::invalid_argument(
        "build_neumann_instance: epsilon must lie in (0, 3/4)");
  if (!(params.delta > 0.0))
    throw std::invalid_argument("build_neumann_instance: delta must be > 0");
  if (!(params.p > 1.0 / (0.75 - params.epsilon))) {
    std::ostringstream msg;
    msg << "build_neumann_instance: need p > 1/(3/4 - eps) = "
        << 1.0 / (0.75 - params.epsilon);
    throw std::invalid_argument(msg.str());
  }

  const ThetaWindow window = theta_window(d);
  const bool inside =
      !window.empty && params.theta > window.lower && params.theta < window.upper;
  if (!inside && !params.override_window) {
    std::ostringstream msg;
    msg << "build_neumann_instance: theta=" << params.theta
        << " outside the admissible window (" << window.lower << ", "
        << window.upper << "); pass override to proceed anyway";
    throw std::invalid_argument(msg.str());
  }
  if (!inside)
    std::cerr << "[ouc] warning: theta=" << params.theta
              << " outside the admissible window; proceeding on override\n";

  Eigen::VectorXd mu(n), sigma(n), g(n);
  Eigen::MatrixXd control_map;

  if (d == 1) {
    const int m = 2;  // the two endpoint fluxes
    control_map.resize(n, m);
    for (int k = 0; k < n; ++k) {
      mu[k] = double(k) * k;
      const double scale = std::pow(params.delta + mu[k], 0.75 - params.epsilon);
      control_map(k, 0) = scale * basis_at_zero(k) / (params.delta + mu[k]);
      control_map(k, 1) = scale * basis_at_pi(k) / (params.delta + mu[k]);
    }
  } else {
    const int m = params.boundary_controls;
    if (m < 1)
      throw std::invalid_argument(
          "build_neumann_instance: need at least one boundary control");
    const auto modes = square_mode_table(n);
    control_map = Eigen::MatrixXd::Zero(n, m);
    for (int k = 0; k < n; ++k)
      mu[k] = double(modes[k].first) * modes[k].first +
              double(modes[k].second) * modes[k].second;
    // Boundary basis: (frequency, side) pairs ordered by frequency then side
    // (bottom, top, left, right).  Each element is the 1-D eigenfunction of
    // that frequency supported on one side, so its pairing with the interior
    // eigenfunction e_i(x) e_j(y) is diagonal in the tangential index.
    for (int c = 0; c < m; ++c) {
      const int freq = c / 4;
      const int side = c % 4;
      for (int k = 0; k < n; ++k) {
        const int i = modes[k].first, j = modes[k].second;
        const double denom = params.delta + mu[k];
        const double scale = std::pow(denom, 0.75 - params.epsilon) / denom;
        double trace = 0.0;
        if (side == 0 && i == freq) trace = basis_at_zero(j);       // y = 0
        else if (side == 1 && i == freq) trace = basis_at_pi(j);    // y = pi
        else if (side == 2 && j == freq) trace = basis_at_zero(i);  // x = 0
        else if (side == 3 && j == freq) trace = basis_at_pi(i);    // x = pi
        control_map(k, c) = scale * trace;
      }
    }
  }

  for (int k = 0; k < n; ++k) {
    sigma[k] = k == 0 ? 1.0 : std::pow(double(k), -params.theta);
    g[k] = std::pow(params.delta + mu[k], 0.25 + params.epsilon);
  }

  // Tightest kernel constant on a log grid, with headroom for off-grid s.
  const double beta = 0.25 + params.epsilon;
  double c_g = 0.0;
  {
    const Eigen::VectorXd s_grid = log_grid(1e-8, 1e3, 256);
    for (int i = 0; i < s_grid.size(); ++i) {
      double lhs = 0.0;
      for (int k = 0; k < n; ++k)
        lhs = std::max(lhs, std::exp(-mu[k] * s_grid[i]) * g[k]);
      c_g = std::max(c_g, lhs / (std::max(std::pow(s_grid[i], -beta), 1.0)));
    }
    c_g *= 1.001;
  }

  NeumannInstance inst;
  inst.params = params;
  inst.model = build_model(std::move(mu), std::move(sigma), std::move(g),
                           std::move(control_map), beta, /*a_g=*/0.0, c_g,
                           params.lambda, params.p, d);
  inst.cost = std::move(cost);

  inst.reports.push_back(check_noise_trace(inst.model, 0.05));
  inst.reports.push_back(check_smoothing(inst.model));
  inst.reports.push_back(
      kernel_bound_audit(inst.model, {1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0}));
  inst.reports.push_back(
      check_commutation(inst.model, 8, {1e-8, 1e-3, 0.1}, 7));

  for (const ConditionReport& rep : inst.reports) {
    if (!rep.satisfied && !params.override_window) {
      throw std::invalid_argument(
          "build_neumann_instance: audit failed (" + rep.condition_id + "): " +
          rep.detail);
    }
    if (!rep.satisfied)
      std::cerr << "[ouc] warning: audit " << rep.condition_id
                << " failed; proceeding on override\n";
  }
  return inst;
}

}  // namespace ouc
