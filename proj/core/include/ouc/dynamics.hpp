#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ouc/control.hpp"
#include "ouc/spectral_model.hpp"

namespace ouc {

// Mean vector and diagonal covariance of a Gaussian transition kernel.
struct GaussianLaw {
  Eigen::VectorXd mean;
  Eigen::VectorXd cov_diag;
};

// Diagonal of Q_t = int_0^t e^{sA} sigma sigma* e^{sA*} ds:
//   Q_t(k) = sigma_k^2 (1 - e^{-2 mu_k t}) / (2 mu_k),
// with the agreement (1 - e^{-2 mu_k t})/(2 mu_k) := t when mu_k = 0
// (expm1 keeps the small-mu*t regime free of cancellation).  t >= 0.
Eigen::VectorXd covariance_qt(const SpectralModel& model, double t);

// Exact mean of the controlled mild solution at time t started from x
// under a simple control:
//   e^{-mu_k t} x_k + sum_i g_k (L u_i)_k int_{I_i} e^{-mu_k (t-s)} ds,
// with the mu_k = 0 limit per interval.  No time-stepping error.
Eigen::VectorXd controlled_mean(const SpectralModel& model,
                                const Eigen::VectorXd& x,
                                const ControlProcess& control, double t);

// Exact drift increment int_{t0}^{t1} e^{-mu (t1-s)} G L u(s) ds for a
// simple control restricted to [t0, t1] (building block of the exact
// transition sampler).
Eigen::VectorXd drift_increment(const SpectralModel& model,
                                const ControlProcess& control, double t0,
                                double t1);

// Uniform grid 0 = t_0 < ... < t_n = horizon.
std::vector<double> uniform_grid(double horizon, int steps);

// One simulated trajectory on a fixed time grid.
struct PathView {
  const std::vector<double>* times;  // size T+1
  Eigen::MatrixXd states;            // (T+1) x N
  Eigen::MatrixXd controls;          // (T+1) x m; row i is the value on [t_i, t_{i+1})
};

// Materialized ensemble; reproducible bit-for-bit from
// (model, control, grid, seed).
struct PathEnsemble {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> states;    // per path, (T+1) x N
  std::vector<Eigen::MatrixXd> controls;  // per path, (T+1) x m
  std::uint64_t seed = 0;
};

// Exact-in-law sampling of the controlled OU transition: each step t -> t'
// draws from the Gaussian with mean restarted at the current state
// (feedback controls frozen at the step's left endpoint) and covariance
// covariance_qt(t' - t).  Normals come from counter-based streams keyed by
// (seed, path, step), so results are independent of scheduling.
PathEnsemble sample_paths(const SpectralModel& model, const Eigen::VectorXd& x,
                          const ControlProcess& control,
                          const std::vector<double>& time_grid, int n_paths,
                          std::uint64_t seed);

// Streaming variant: visits every path without materializing the ensemble.
// Paths are split into `path_chunk_count(n_paths)` fixed blocks; one block
// is processed start-to-end by a single thread, so accumulating into a
// per-chunk slot (indexed by path_chunk_of) and merging slots in order
// yields schedule-independent totals (see mc_over_paths in verify.hpp).
void for_each_path(const SpectralModel& model, const Eigen::VectorXd& x,
                   const ControlProcess& control,
                   const std::vector<double>& time_grid, int n_paths,
                   std::uint64_t seed,
                   const std::function<void(int, const PathView&)>& visit);

int path_chunk_count(int n_paths);
int path_chunk_of(int path, int n_paths);

// Audits the kernel bound max_k e^{-mu_k s} |g_k| <= c_g (s^{-beta} v 1)
// e^{a_g s} on the grid; the witness is the tightest admissible c_g.
ConditionReport kernel_bound_audit(const SpectralModel& model,
                                   const std::vector<double>& t_grid);

}  // namespace ouc
