#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ouc {

// Admissible control set: a coordinate box, possibly unbounded.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box all_of(int dim) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Eigen::VectorXd::Constant(dim, -inf),
            Eigen::VectorXd::Constant(dim, inf)};
  }
  static Box symmetric(int dim, double radius) {
    return {Eigen::VectorXd::Constant(dim, -radius),
            Eigen::VectorXd::Constant(dim, radius)};
  }
  static Box singleton(const Eigen::VectorXd& u) { return {u, u}; }

  int dim() const { return static_cast<int>(lo.size()); }
  bool bounded() const {
    return lo.allFinite() && hi.allFinite();
  }
  bool contains(const Eigen::VectorXd& u, double tol = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (u[i] < lo[i] - tol || u[i] > hi[i] + tol) return false;
    return true;
  }
  Eigen::VectorXd project(const Eigen::VectorXd& u) const {
    return u.cwiseMax(lo).cwiseMin(hi);
  }
};

// Adapted control process: either a cadlag piecewise-constant (simple)
// process holding value values[i] on [times[i], times[i+1]) with
// times[0] = 0 and the last interval extending to +infinity, or a
// stationary feedback policy evaluated at the left endpoint of each
// simulation step and held constant across the step.
class ControlProcess {
 public:
  using FeedbackFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  enum class Kind { kSimple, kFeedback };

  static ControlProcess constant(Eigen::VectorXd u);
  static ControlProcess simple(std::vector<double> times,
                               std::vector<Eigen::VectorXd> values);
  // Feedback policy with its admissible box; outputs that drift outside the
  // box are projected back onto it (with a one-time warning).
  static ControlProcess feedback(FeedbackFn policy, Box admissible);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Box& admissible_set() const { return admissible_; }

  // Simple-control accessors.
  const std::vector<double>& jump_times() const { return times_; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }
  Eigen::VectorXd value_at(double t) const;

  // Feedback accessor.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& state) const;

 private:
  ControlProcess() = default;
  Kind kind_ = Kind::kSimple;
  int dim_ = 0;
  std::vector<double> times_;              // t_0 = 0 < t_1 < ...
  std::vector<Eigen::VectorXd> values_;    // one per interval
  FeedbackFn policy_;
  Box admissible_;
};

// Piecewise-constant cadlag approximation of a sampled control path:
// holds the left-endpoint value on each mesh interval.  Returns the
// simple process together with the L^2([0,T]) distance to the input
// (computed on the input grid by the trapezoid rule).
struct SimpleApproximation {
  ControlProcess control;
  double l2_distance = 0.0;
};
SimpleApproximation approximate_by_simple(
    const std::vector<double>& grid, const std::vector<Eigen::VectorXd>& values,
    double mesh);

}  // namespace ouc
