#include "ouc/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ouc/rng.hpp"

namespace ouc {

namespace {

// (1 - e^{-a t}) / a with the a = 0 limit t, stable for small a t.
double phi(double a, double t) {
  if (a == 0.0) return t;
  return -std::expm1(-a * t) / a;
}

int worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

constexpr int kPathChunks = 64;

std::once_flag projection_warning_flag;

}  // namespace

int path_chunk_count(int n_paths) { return std::min(n_paths, kPathChunks); }

int path_chunk_of(int path, int n_paths) {
  // Inverse of the ranges [n*c/C, n*(c+1)/C): c = ceil((path+1)*C/n) - 1.
  const std::int64_t c = path_chunk_count(n_paths);
  const std::int64_t n = n_paths;
  return static_cast<int>(((std::int64_t(path) + 1) * c + n - 1) / n - 1);
}

Eigen::VectorXd covariance_qt(const SpectralModel& model, double t) {
  if (t < 0.0) throw std::invalid_argument("covariance_qt: t must be >= 0");
  const int n = model.n_modes();
  Eigen::VectorXd q(n);
  for (int k = 0; k < n; ++k) {
    const double s2 = model.sigma_diag[k] * model.sigma_diag[k];
    q[k] = s2 * phi(2.0 * model.mu[k], t);
  }
  return q;
}

Eigen::VectorXd drift_increment(const SpectralModel& model,
                                const ControlProcess& control, double t0,
                                double t1) {
  if (control.kind() != ControlProcess::Kind::kSimple)
    throw std::invalid_argument("drift_increment: control must be simple");
  if (!(t1 >= t0))
    throw std::invalid_argument("drift_increment: need t1 >= t0");
  const int n = model.n_modes();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  const auto& times = control.jump_times();
  const auto& vals = control.values();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double a = std::max(times[i], t0);
    const double b =
        std::min(i + 1 < times.size() ? times[i + 1] : t1, t1);
    if (!(b > a)) continue;
    const Eigen::VectorXd lu = model.control_map * vals[i];
    for (int k = 0; k < n; ++k) {
      // int_a^b e^{-mu (t1 - s)} ds = e^{-mu (t1 - b)} phi(mu, b - a)
      const double w =
          std::exp(-model.mu[k] * (t1 - b)) * phi(model.mu[k], b - a);
      out[k] += model.g_diag[k] * lu[k] * w;
    }
  }
  return out;
}

Eigen::VectorXd controlled_mean(const SpectralModel& model,
                                const Eigen::VectorXd& x,
                                const ControlProcess& control, double t) {
  if (t < 0.0) throw std::invalid_argument("controlled_mean: t must be >= 0");
  if (x.size() != model.n_modes())
    throw std::invalid_argument("controlled_mean: state dimension mismatch");
  Eigen::VectorXd mean(model.n_modes());
  for (int k = 0; k < model.n_modes(); ++k)
    mean[k] = std::exp(-model.mu[k] * t) * x[k];
  return mean + drift_increment(model, control, 0.0, t);
}

std::vector<double> uniform_grid(double horizon, int steps) {
  if (!(horizon > 0.0) || steps < 1)
    throw std::invalid_argument("uniform_grid: bad horizon or step count");
  std::vector<double> g(steps + 1);
  for (int i = 0; i <= steps; ++i) g[i] = horizon * i / steps;
  return g;
}

void for_each_path(const SpectralModel& model, const Eigen::VectorXd& x,
                   const ControlProcess& control,
                   const std::vector<double>& time_grid, int n_paths,
                   std::uint64_t seed,
                   const std::function<void(int, const PathView&)>& visit) {
  if (n_paths < 1)
    throw std::invalid_argument("for_each_path: need at least one path");
  if (time_grid.size() < 2 || time_grid.front() != 0.0)
    throw std::invalid_argument("for_each_path: grid must start at 0");
  for (std::size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1]))
      throw std::invalid_argument("for_each_path: grid must be increasing");
  if (x.size() != model.n_modes())
    throw std::invalid_argument("for_each_path: state dimension mismatch");

  const int n = model.n_modes();
  const int m = control.dim();
  const int n_steps = static_cast<int>(time_grid.size()) - 1;
  const bool is_feedback = control.kind() == ControlProcess::Kind::kFeedback;

  // Per-step decay factors and standard deviations are control-independent.
  Eigen::MatrixXd decay(n_steps, n), sd(n_steps, n);
  std::vector<Eigen::VectorXd> step_drift;  // simple controls only
  if (!is_feedback) step_drift.reserve(n_steps);
  for (int s = 0; s < n_steps; ++s) {
    const double dt = time_grid[s + 1] - time_grid[s];
    for (int k = 0; k < n; ++k) {
      decay(s, k) = std::exp(-model.mu[k] * dt);
      const double s2 = model.sigma_diag[k] * model.sigma_diag[k];
      sd(s, k) = std::sqrt(s2 * phi(2.0 * model.mu[k], dt));
    }
    if (!is_feedback)
      step_drift.push_back(
          drift_increment(model, control, time_grid[s], time_grid[s + 1]));
  }

  auto run_path = [&](int path) {
    PathView view;
    view.times = &time_grid;
    view.states.resize(n_steps + 1, n);
    view.controls.resize(n_steps + 1, m);
    view.states.row(0) = x.transpose();
    Eigen::VectorXd state = x;
    for (int s = 0; s < n_steps; ++s) {
      const double dt = time_grid[s + 1] - time_grid[s];
      Eigen::VectorXd u;
      Eigen::VectorXd drift;
      if (is_feedback) {
        u = control.evaluate(state);
        if (!u.allFinite())
          throw std::runtime_error(
              "for_each_path: feedback returned a non-finite control");
        if (!control.admissible_set().contains(u, 1e-12)) {
          std::call_once(projection_warning_flag, [] {
            std::cerr << "[ouc] warning: feedback output left the admissible "
                         "box; projecting\n";
          });
          u = control.admissible_set().project(u);
        }
        const Eigen::VectorXd lu = model.control_map * u;
        drift.resize(n);
        for (int k = 0; k < n; ++k)
          drift[k] = model.g_diag[k] * lu[k] * phi(model.mu[k], dt);
      } else {
        u = control.value_at(time_grid[s]);
        drift = step_drift[s];
      }
      view.controls.row(s) = u.transpose();
      CounterRng rng(seed, static_cast<std::uint64_t>(path),
                     static_cast<std::uint64_t>(s));
      for (int k = 0; k < n; ++k) {
        state[k] = decay(s, k) * state[k] + drift[k] +
                   sd(s, k) * rng.next_normal();
      }
      view.states.row(s + 1) = state.transpose();
    }
    // Convenience: repeat the last control value at the final node.
    if (n_steps > 0)
      view.controls.row(n_steps) = view.controls.row(n_steps - 1);
    else
      view.controls.row(n_steps).setZero();
    visit(path, view);
  };

  // Chunked scheduling: paths are split into kPathChunks fixed blocks and a
  // block is processed start-to-end by a single thread, so per-chunk
  // accumulation in `visit` needs no locking and totals merged in chunk
  // order are schedule-independent.
  const int n_chunks = std::min(n_paths, kPathChunks);
  auto chunk_range = [&](int c) {
    const int lo = static_cast<int>(std::int64_t(n_paths) * c / n_chunks);
    const int hi = static_cast<int>(std::int64_t(n_paths) * (c + 1) / n_chunks);
    return std::pair<int, int>(lo, hi);
  };
  const int threads = std::min(worker_count(), n_chunks);
  if (threads <= 1 || n_paths < 32) {
    for (int p = 0; p < n_paths; ++p) run_path(p);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
          const auto [lo, hi] = chunk_range(c);
          for (int p = lo; p < hi; ++p) run_path(p);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PathEnsemble sample_paths(const SpectralModel& model, const Eigen::VectorXd& x,
                          const ControlProcess& control,
                          const std::vector<double>& time_grid, int n_paths,
                          std::uint64_t seed) {
  PathEnsemble ens;
  ens.times = time_grid;
  ens.seed = seed;
  ens.states.resize(n_paths);
  ens.controls.resize(n_paths);
  for_each_path(model, x, control, time_grid, n_paths, seed,
                [&](int path, const PathView& view) {
                  ens.states[path] = view.states;
                  ens.controls[path] = view.controls;
                });
  return ens;
}

ConditionReport kernel_bound_audit(const SpectralModel& model,
                                   const std::vector<double>& t_grid) {
  double tightest = 0.0;
  for (double s : t_grid) {
    if (!(s > 0.0))
      throw std::invalid_argument("kernel_bound_audit: grid must be positive");
    double lhs = 0.0;
    for (int k = 0; k < model.n_modes(); ++k)
      lhs = std::max(lhs,
                     std::exp(-model.mu[k] * s) * std::abs(model.g_diag[k]));
    const double shape =
        std::max(std::pow(s, -model.beta), 1.0) * std::exp(model.a_g * s);
    tightest = std::max(tightest, lhs / shape);
  }
  ConditionReport rep;
  rep.condition_id = "esg";
  rep.witness = tightest;
  rep.satisfied = tightest <= model.c_g * (1.0 + 1e-12);
  {
    std::ostringstream det;
    det << "tightest admissible C_G on the grid = " << tightest
        << " (declared " << model.c_g << ")";
    rep.detail = det.str();
  }
  return rep;
}

}  // namespace ouc
