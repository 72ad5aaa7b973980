#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "ouc/spectral_model.hpp"

namespace ouc {

class CylinderFunction;

// Bounded scalar field on the mode space, depending on finitely many modes.
class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual double operator()(const Eigen::VectorXd& x) const = 0;
  // Modes the field actually reads; evaluation ignores all others.
  virtual const std::vector<int>& support() const = 0;
  virtual double sup_norm() const = 0;
  virtual const CylinderFunction* as_cylinder() const { return nullptr; }
};

// Smooth test function of finitely many modes with analytically known
// gradient, Hessian and G-gradient: the class on which the generator acts
// exactly.  Shapes:
//   trig:      amplitude * cos(<a, x> + phase)
//   gauss_bump:amplitude * exp(-(<a, x> - center)^2 / (2 width^2))
//   constant:  amplitude
// Boundedness with bounded first/second derivatives holds by construction;
// membership in S^{A,G}(H) follows from the diagonal commutation property
// (see check_commutation).
class CylinderFunction : public ScalarField {
 public:
  enum class Kind { kTrig, kGaussBump, kConstant };

  static CylinderFunction trig(Eigen::VectorXd direction, double phase,
                               double amplitude);
  static CylinderFunction gauss_bump(Eigen::VectorXd direction, double center,
                                     double width, double amplitude);
  static CylinderFunction constant(double value, int n_modes);

  double operator()(const Eigen::VectorXd& x) const override;
  const std::vector<int>& support() const override { return support_; }
  double sup_norm() const override;
  const CylinderFunction* as_cylinder() const override { return this; }

  Kind kind() const { return kind_; }
  const Eigen::VectorXd& direction() const { return direction_; }
  double phase() const { return phase_; }
  double amplitude() const { return amplitude_; }
  double center() const { return center_; }
  double width() const { return width_; }

  // Frechet gradient, Hessian diagonal, and G-gradient (G*D f, i.e. the
  // k-th component scaled by g_k).
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd hessian_diag(const Eigen::VectorXd& x) const;
  Eigen::VectorXd g_gradient(const SpectralModel& model,
                             const Eigen::VectorXd& x) const;

 private:
  CylinderFunction() = default;
  void rebuild_support();

  // Scalar profile h(s) with f(x) = h(<a, x>), plus derivatives.
  double profile(double s) const;
  double profile_d1(double s) const;
  double profile_d2(double s) const;

  Kind kind_ = Kind::kConstant;
  Eigen::VectorXd direction_;
  double phase_ = 0.0;
  double amplitude_ = 0.0;
  double center_ = 0.0;
  double width_ = 1.0;
  std::vector<int> support_;
};

// Numerical representation of a value function on a rectangular grid over
// the leading modes, carrying node values of v and of its G-gradient.
// Interpolation is multilinear; evaluation outside the grid clamps to the
// boundary value.
class ValueField : public ScalarField {
 public:
  ValueField() = default;
  // Uniform grid with `nodes_per_dim` nodes on [-half_width, half_width]
  // in each of the m_lead leading modes.
  ValueField(int m_lead, double half_width, int nodes_per_dim);

  double operator()(const Eigen::VectorXd& x) const override;
  const std::vector<int>& support() const override { return support_; }
  double sup_norm() const override { return values_.cwiseAbs().maxCoeff(); }

  // Interpolated G-gradient at x (m_lead components; all other components
  // of the K-vector vanish for cylinder fields).
  Eigen::VectorXd g_gradient(const Eigen::VectorXd& x) const;
  // Same, expanded to a full K-vector of length n_modes.
  Eigen::VectorXd g_gradient_full(const Eigen::VectorXd& x, int n_modes) const;

  int m_lead() const { return m_lead_; }
  double half_width() const { return half_width_; }
  int nodes_per_dim() const { return nodes_per_dim_; }
  int n_nodes() const { return static_cast<int>(values_.size()); }
  double spacing() const { return 2.0 * half_width_ / (nodes_per_dim_ - 1); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::MatrixXd& g_gradients() { return g_gradients_; }
  const Eigen::MatrixXd& g_gradients() const { return g_gradients_; }

  // Node coordinates (m_lead components) for a flattened node index.
  Eigen::VectorXd node_coords(int flat_index) const;
  bool is_interior(int flat_index, int margin = 1) const;

 private:
  // Multilinear weights for the cell containing x (clamped).
  struct CellRef {
    int base[8];        // flattened indices of the cell corners
    double weight[8];   // matching weights
    int corners;
  };
  CellRef locate(const Eigen::VectorXd& x) const;

  int m_lead_ = 0;
  double half_width_ = 0.0;
  int nodes_per_dim_ = 0;
  Eigen::VectorXd values_;       // flattened, last dim fastest
  Eigen::MatrixXd g_gradients_;  // n_nodes x m_lead
  std::vector<int> support_;
};

}  // namespace ouc
