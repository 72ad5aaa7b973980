#include "ouc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ouc {

CylinderFunction CylinderFunction::trig(Eigen::VectorXd direction, double phase,
                                        double amplitude) {
  CylinderFunction f;
  f.kind_ = Kind::kTrig;
  f.direction_ = std::move(direction);
  f.phase_ = phase;
  f.amplitude_ = amplitude;
  f.rebuild_support();
  return f;
}

CylinderFunction CylinderFunction::gauss_bump(Eigen::VectorXd direction,
                                              double center, double width,
                                              double amplitude) {
  if (!(width > 0.0))
    throw std::invalid_argument("CylinderFunction: width must be positive");
  CylinderFunction f;
  f.kind_ = Kind::kGaussBump;
  f.direction_ = std::move(direction);
  f.center_ = center;
  f.width_ = width;
  f.amplitude_ = amplitude;
  f.rebuild_support();
  return f;
}

CylinderFunction CylinderFunction::constant(double value, int n_modes) {
  CylinderFunction f;
  f.kind_ = Kind::kConstant;
  f.direction_ = Eigen::VectorXd::Zero(n_modes);
  f.amplitude_ = value;
  f.rebuild_support();
  return f;
}

void CylinderFunction::rebuild_support() {
  support_.clear();
  for (int k = 0; k < direction_.size(); ++k)
    if (direction_[k] != 0.0) support_.push_back(k);
}

double CylinderFunction::profile(double s) const {
  switch (kind_) {
    case Kind::kTrig:
      return amplitude_ * std::cos(s + phase_);
    case Kind::kGaussBump: {
      const double z = (s - center_) / width_;
      return amplitude_ * std::exp(-0.5 * z * z);
    }
    case Kind::kConstant:
      return amplitude_;
  }
  return 0.0;
}

double CylinderFunction::profile_d1(double s) const {
  switch (kind_) {
    case Kind::kTrig:
      return -amplitude_ * std::sin(s + phase_);
    case Kind::kGaussBump: {
      const double z = (s - center_) / width_;
      return -amplitude_ * z / width_ * std::exp(-0.5 * z * z);
    }
    case Kind::kConstant:
      return 0.0;
  }
  return 0.0;
}

double CylinderFunction::profile_d2(double s) const {
  switch (kind_) {
    case Kind::kTrig:
      return -amplitude_ * std::cos(s + phase_);
    case Kind::kGaussBump: {
      const double z = (s - center_) / width_;
      return amplitude_ * (z * z - 1.0) / (width_ * width_) *
             std::exp(-0.5 * z * z);
    }
    case Kind::kConstant:
      return 0.0;
  }
  return 0.0;
}

double CylinderFunction::operator()(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int k : support_) s += direction_[k] * x[k];
  return profile(s);
}

double CylinderFunction::sup_norm() const { return std::abs(amplitude_); }

Eigen::VectorXd CylinderFunction::gradient(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int k : support_) s += direction_[k] * x[k];
  return profile_d1(s) * direction_;
}

Eigen::VectorXd CylinderFunction::hessian_diag(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int k : support_) s += direction_[k] * x[k];
  return profile_d2(s) * direction_.cwiseProduct(direction_);
}

Eigen::VectorXd CylinderFunction::g_gradient(const SpectralModel& model,
                                             const Eigen::VectorXd& x) const {
  if (direction_.size() != model.n_modes())
    throw std::invalid_argument(
        "CylinderFunction: direction outside the truncation support");
  return model.g_diag.cwiseProduct(gradient(x));
}

ValueField::ValueField(int m_lead, double half_width, int nodes_per_dim)
    : m_lead_(m_lead), half_width_(half_width), nodes_per_dim_(nodes_per_dim) {
  if (m_lead < 1 || m_lead > 3)
    throw std::invalid_argument("ValueField: m_lead must be 1, 2 or 3");
  if (!(half_width > 0.0) || nodes_per_dim < 3)
    throw std::invalid_argument("ValueField: bad grid spec");
  int total = 1;
  for (int j = 0; j < m_lead; ++j) total *= nodes_per_dim;
  values_ = Eigen::VectorXd::Zero(total);
  g_gradients_ = Eigen::MatrixXd::Zero(total, m_lead);
  for (int j = 0; j < m_lead; ++j) support_.push_back(j);
}

Eigen::VectorXd ValueField::node_coords(int flat_index) const {
  Eigen::VectorXd coords(m_lead_);
  const double h = spacing();
  for (int j = m_lead_ - 1; j >= 0; --j) {
    const int idx = flat_index % nodes_per_dim_;
    flat_index /= nodes_per_dim_;
    coords[j] = -half_width_ + h * idx;
  }
  return coords;
}

bool ValueField::is_interior(int flat_index, int margin) const {
  for (int j = m_lead_ - 1; j >= 0; --j) {
    const int idx = flat_index % nodes_per_dim_;
    flat_index /= nodes_per_dim_;
    if (idx < margin || idx >= nodes_per_dim_ - margin) return false;
  }
  return true;
}

ValueField::CellRef ValueField::locate(const Eigen::VectorXd& x) const {
  const double h = spacing();
  int lo_idx[3];
  double frac[3];
  for (int j = 0; j < m_lead_; ++j) {
    // Clamp to the grid: outside points take the boundary value.
    double rel = (x[j] + half_width_) / h;
    rel = std::clamp(rel, 0.0, double(nodes_per_dim_ - 1));
    int lo = std::min(static_cast<int>(rel), nodes_per_dim_ - 2);
    lo_idx[j] = lo;
    frac[j] = rel - lo;
  }
  CellRef cell;
  cell.corners = 1 << m_lead_;
  for (int c = 0; c < cell.corners; ++c) {
    int flat = 0;
    double w = 1.0;
    for (int j = 0; j < m_lead_; ++j) {
      const int bit = (c >> j) & 1;
      flat = flat * nodes_per_dim_ + lo_idx[j] + bit;
      w *= bit ? frac[j] : 1.0 - frac[j];
    }
    cell.base[c] = flat;
    cell.weight[c] = w;
  }
  return cell;
}

double ValueField::operator()(const Eigen::VectorXd& x) const {
  const CellRef cell = locate(x);
  double out = 0.0;
  for (int c = 0; c < cell.corners; ++c)
    out += cell.weight[c] * values_[cell.base[c]];
  return out;
}

Eigen::VectorXd ValueField::g_gradient(const Eigen::VectorXd& x) const {
  const CellRef cell = locate(x);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m_lead_);
  for (int c = 0; c < cell.corners; ++c)
    out += cell.weight[c] * g_gradients_.row(cell.base[c]).transpose();
  return out;
}

Eigen::VectorXd ValueField::g_gradient_full(const Eigen::VectorXd& x,
                                            int n_modes) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n_modes);
  full.head(m_lead_) = g_gradient(x);
  return full;
}

}  // namespace ouc
