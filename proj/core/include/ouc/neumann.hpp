#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ouc/hjb.hpp"
#include "ouc/spectral_model.hpp"

namespace ouc {

// Cosine-basis coefficients of the solution w of
//   w'' = delta w on (0, pi),  -w'(0) = alpha_0,  w'(pi) = alpha_pi:
//   <N_delta alpha, e_k> = (alpha_0 e_k(0) + alpha_pi e_k(pi)) / (delta + k^2)
// with e_0 = 1/sqrt(pi), e_k = sqrt(2/pi) cos(k xi).
Eigen::VectorXd neumann_map_1d(double delta, double alpha_0, double alpha_pi,
                               int n_modes);

struct NeumannParams {
  int spatial_dim = 1;       // 1 or 2
  int n_modes = 8;
  double delta = 1.0;
  double epsilon = 0.05;     // in (0, 3/4)
  double theta = 0.0;        // noise decay exponent: sigma_k = k^{-theta}
  int boundary_controls = 2; // control dimension (d = 2 only; d = 1 has 2)
  double lambda = 8.0;
  double p = 2.0;
  bool override_window = false;  // accept theta outside the admissible window
};

struct NeumannInstance {
  NeumannParams params;
  SpectralModel model;
  CostSpec cost;
  std::vector<ConditionReport> reports;
};

// Assembles the boundary-controlled heat semigroup data on the truncation:
// g_k = (delta + mu_k)^{1/4+eps}, L = (delta + mu_k)^{3/4-eps} N_delta (so
// G L alpha has the boundary-trace coefficients, independent of delta and
// eps), sigma_k = k^{-theta} with sigma_0 = 1.  Runs the standing-assumption
// audits and attaches the reports; refuses instances whose audits fail
// unless override_window is set.
NeumannInstance build_neumann_instance(const NeumannParams& params,
                                       CostSpec cost);

// Mode index table for the d = 2 square: sorted (i, j) frequency pairs.
std::vector<std::pair<int, int>> square_mode_table(int n_modes);

}  // namespace ouc
