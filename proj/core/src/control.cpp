#include "ouc/control.hpp"

#include <algorithm>
#include <cmath>

namespace ouc {

ControlProcess ControlProcess::constant(Eigen::VectorXd u) {
  ControlProcess c;
  c.kind_ = Kind::kSimple;
  c.dim_ = static_cast<int>(u.size());
  c.times_ = {0.0};
  c.values_ = {std::move(u)};
  return c;
}

ControlProcess ControlProcess::simple(std::vector<double> times,
                                      std::vector<Eigen::VectorXd> values) {
  if (times.empty() || times.front() != 0.0)
    throw std::invalid_argument("ControlProcess: jump times must start at 0");
  if (times.size() != values.size())
    throw std::invalid_argument("ControlProcess: one value per interval");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument(
          "ControlProcess: jump times must be strictly increasing");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i].size() != values[0].size())
      throw std::invalid_argument("ControlProcess: inconsistent value dims");
  ControlProcess c;
  c.kind_ = Kind::kSimple;
  c.dim_ = static_cast<int>(values[0].size());
  c.times_ = std::move(times);
  c.values_ = std::move(values);
  return c;
}

ControlProcess ControlProcess::feedback(FeedbackFn policy, Box admissible) {
  if (!policy) throw std::invalid_argument("ControlProcess: null policy");
  ControlProcess c;
  c.kind_ = Kind::kFeedback;
  c.dim_ = admissible.dim();
  c.policy_ = std::move(policy);
  c.admissible_ = std::move(admissible);
  return c;
}

Eigen::VectorXd ControlProcess::value_at(double t) const {
  if (kind_ != Kind::kSimple)
    throw std::logic_error("ControlProcess: value_at on a feedback control");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  return values_[i == 0 ? 0 : i - 1];
}

Eigen::VectorXd ControlProcess::evaluate(const Eigen::VectorXd& state) const {
  if (kind_ != Kind::kFeedback)
    throw std::logic_error("ControlProcess: evaluate on a simple control");
  return policy_(state);
}

SimpleApproximation approximate_by_simple(
    const std::vector<double>& grid, const std::vector<Eigen::VectorXd>& values,
    double mesh) {
  if (grid.empty() || values.size() != grid.size())
    throw std::invalid_argument("approximate_by_simple: empty or ragged input");
  if (!(mesh > 0.0))
    throw std::invalid_argument("approximate_by_simple: mesh must be > 0");

  const double t0 = grid.front();
  const double T = grid.back();

  // Value of the input at time t (left sample; grid values are exact).
  auto sample = [&](double t) -> const Eigen::VectorXd& {
    auto it = std::upper_bound(grid.begin(), grid.end(), t + 1e-15);
    const auto i = static_cast<std::size_t>(it - grid.begin());
    return values[i == 0 ? 0 : i - 1];
  };

  std::vector<double> jump_times;
  std::vector<Eigen::VectorXd> jump_values;
  for (int i = 0; t0 + i * mesh < T - 1e-15; ++i) {
    jump_times.push_back(t0 + i * mesh);
    jump_values.push_back(sample(t0 + i * mesh));
  }
  if (jump_times.empty()) {
    jump_times.push_back(t0);
    jump_values.push_back(values.front());
  }

  double dist_sq = 0.0;
  auto err_sq = [&](std::size_t i) {
    const double t = grid[i];
    const double cell = t0 + mesh * std::floor((t - t0) / mesh + 1e-12);
    return (values[i] - sample(std::min(cell, jump_times.back()))).squaredNorm();
  };
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double dt = grid[i + 1] - grid[i];
    dist_sq += 0.5 * dt * (err_sq(i) + err_sq(i + 1));
  }

  return SimpleApproximation{
      ControlProcess::simple(std::move(jump_times), std::move(jump_values)),
      std::sqrt(dist_sq)};
}

}  // namespace ouc
