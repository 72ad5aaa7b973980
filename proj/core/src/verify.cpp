#include "ouc/verify.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ouc/manifest.hpp"
#include "ouc/semigroup.hpp"

namespace ouc {

namespace {

// Chan et al. pairwise-merge form of Welford accumulation.
struct VectorStats {
  long n = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit VectorStats(int dim = 0)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::VectorXd& v) {
    ++n;
    const Eigen::VectorXd delta = v - mean;
    mean += delta / double(n);
    m2 += delta.cwiseProduct(v - mean);
  }
  void merge(const VectorStats& other) {
    if (other.n == 0) return;
    if (n == 0) {
      *this = other;
      return;
    }
    const long total = n + other.n;
    const Eigen::VectorXd delta = other.mean - mean;
    m2 += other.m2 +
          delta.cwiseProduct(delta) * (double(n) * double(other.n) / total);
    mean += delta * (double(other.n) / total);
    n = total;
  }
};

std::string digest(const SpectralModel& model, std::uint64_t seed,
                   const std::string& extra) {
  std::ostringstream out;
  out << "model=" << model_hash(model) << " seed=" << seed << " " << extra;
  return out.str();
}

double max_abs_running_cost(const CostSpec& cost) {
  // sup over the admissible box of |l1 + l2|; infinity when unavailable.
  if (!cost.control_set.bounded() || cost.l2_override)
    return std::numeric_limits<double>::infinity();
  const Box& box = cost.control_set;
  double l2_max = 0.0;
  Eigen::VectorXd u(box.dim());
  for (int mask = 0; mask < (1 << box.dim()); ++mask) {
    for (int j = 0; j < box.dim(); ++j)
      u[j] = (mask >> j) & 1 ? box.hi[j] : box.lo[j];
    l2_max = std::max(l2_max, cost.l2(u));
  }
  return std::max(std::abs(cost.l1_sup + l2_max),
                  std::abs(cost.l1_inf + cost.l2_min()));
}

}  // namespace

McMoments mc_over_paths(
    const SpectralModel& model, const Eigen::VectorXd& x,
    const ControlProcess& control, const std::vector<double>& grid,
    int n_paths, std::uint64_t seed, int dim,
    const std::function<void(const PathView&, Eigen::VectorXd&)>& functional) {
  const int n_chunks = path_chunk_count(n_paths);
  std::vector<VectorStats> chunks(n_chunks, VectorStats(dim));
  for_each_path(model, x, control, grid, n_paths, seed,
                [&](int path, const PathView& view) {
                  Eigen::VectorXd out(dim);
                  functional(view, out);
                  chunks[path_chunk_of(path, n_paths)].add(out);
                });
  VectorStats total(dim);
  for (const VectorStats& c : chunks) total.merge(c);
  McMoments mm;
  mm.n = total.n;
  mm.mean = total.mean;
  if (total.n > 1)
    mm.std_error =
        (total.m2 / double(total.n - 1) / double(total.n)).cwiseSqrt();
  else
    mm.std_error = Eigen::VectorXd::Zero(dim);
  return mm;
}

double discounted_path_integral(double lambda, const std::vector<double>& t,
                                const Eigen::VectorXd& psi) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double a = t[i], b = t[i + 1];
    const double pa = psi[i], pb = psi[i + 1];
    if (lambda == 0.0) {
      total += 0.5 * (b - a) * (pa + pb);
      continue;
    }
    // int_a^b e^{-lambda t} [pa + (pb-pa)(t-a)/(b-a)] dt, exact.
    const double i0 = (std::exp(-lambda * a) - std::exp(-lambda * b)) / lambda;
    const double i1 =
        (-(b - a) * std::exp(-lambda * b) + i0) / lambda;  // int (t-a) e^{-lt}
    total += pa * i0 + (pb - pa) / (b - a) * i1;
  }
  return total;
}

double discounted_path_integral_coarse(double lambda,
                                       const std::vector<double>& t,
                                       const Eigen::VectorXd& psi) {
  std::vector<double> t2;
  std::vector<double> p2;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    t2.push_back(t[i]);
    p2.push_back(psi[i]);
  }
  if (t2.back() != t.back()) {
    t2.push_back(t.back());
    p2.push_back(psi[psi.size() - 1]);
  }
  Eigen::VectorXd pv =
      Eigen::Map<const Eigen::VectorXd>(p2.data(), p2.size());
  return discounted_path_integral(lambda, t2, pv);
}

JEstimate estimate_J(const SpectralModel& model, const CostSpec& cost,
                     const Eigen::VectorXd& x, const ControlProcess& control,
                     double horizon, int steps, int n_paths,
                     std::uint64_t seed) {
  if (n_paths < 2)
    throw std::invalid_argument("estimate_J: need at least 2 paths");
  const std::vector<double> grid = uniform_grid(horizon, steps);
  const double lambda = model.lambda;
  const McMoments mm = mc_over_paths(
      model, x, control, grid, n_paths, seed, 2,
      [&](const PathView& view, Eigen::VectorXd& out) {
        const int nt = static_cast<int>(view.times->size());
        Eigen::VectorXd psi(nt);
        for (int i = 0; i < nt; ++i)
          psi[i] = cost.running_cost(view.states.row(i).transpose(),
                                     view.controls.row(i).transpose());
        out[0] = discounted_path_integral(lambda, *view.times, psi);
        out[1] = discounted_path_integral_coarse(lambda, *view.times, psi);
      });
  JEstimate est;
  est.value = mm.mean[0];
  est.std_error = mm.std_error[0];
  est.quadrature_estimate = std::abs(mm.mean[0] - mm.mean[1]) / 3.0;
  const double sup_l = max_abs_running_cost(cost);
  if (std::isfinite(sup_l))
    est.tail_bound = std::exp(-lambda * horizon) * sup_l / lambda;
  return est;
}

VerificationReport dynkin_residual(const SpectralModel& model,
                                   const CylinderFunction& f, double lambda,
                                   double horizon, const Eigen::VectorXd& x,
                                   const ControlProcess& control, int steps,
                                   int n_paths, std::uint64_t seed) {
  const std::vector<double> grid = uniform_grid(horizon, steps);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_modes());
  const double f_at_x = f(x);
  const McMoments mm = mc_over_paths(
      model, x, control, grid, n_paths, seed, 2,
      [&](const PathView& view, Eigen::VectorXd& out) {
        const int nt = static_cast<int>(view.times->size());
        Eigen::VectorXd psi(nt);
        for (int i = 0; i < nt; ++i) {
          const Eigen::VectorXd state = view.states.row(i).transpose();
          const Eigen::VectorXd u = view.controls.row(i).transpose();
          psi[i] = apply_generator(model, zero, f, state) - lambda * f(state) +
                   drift_from_control(model, u).dot(f.g_gradient(model, state));
        }
        const double lhs =
            std::exp(-lambda * horizon) * f(view.states.row(nt - 1).transpose());
        out[0] = lhs - f_at_x -
                 discounted_path_integral(lambda, *view.times, psi);
        out[1] = lhs - f_at_x -
                 discounted_path_integral_coarse(lambda, *view.times, psi);
      });
  VerificationReport rep;
  rep.check_id = "dynkin";
  rep.estimate = mm.mean[0];
  rep.standard_error = mm.std_error[0];
  const double quad_est = std::abs(mm.mean[0] - mm.mean[1]) / 3.0 +
                          1e-13 * (1.0 + f.sup_norm());
  rep.pass = std::abs(rep.estimate) <= 3.0 * rep.standard_error + quad_est;
  {
    std::ostringstream extra;
    extra << "T=" << horizon << " paths=" << n_paths << " steps=" << steps
          << " quad_est=" << quad_est;
    rep.inputs_digest = digest(model, seed, extra.str());
  }
  return rep;
}

FundamentalIdentityResult fundamental_identity_residual(
    const SpectralModel& model, const CostSpec& cost, const ValueField& v,
    const Eigen::VectorXd& x, const ControlProcess& control, double horizon,
    int steps, int n_paths, std::uint64_t seed, double solver_budget) {
  const std::vector<double> grid = uniform_grid(horizon, steps);
  const double lambda = model.lambda;
  const int n = model.n_modes();
  const McMoments mm = mc_over_paths(
      model, x, control, grid, n_paths, seed, 4,
      [&](const PathView& view, Eigen::VectorXd& out) {
        const int nt = static_cast<int>(view.times->size());
        Eigen::VectorXd cost_psi(nt), gap_psi(nt);
        for (int i = 0; i < nt; ++i) {
          const Eigen::VectorXd state = view.states.row(i).transpose();
          const Eigen::VectorXd u = view.controls.row(i).transpose();
          const Eigen::VectorXd q = v.g_gradient_full(state, n);
          cost_psi[i] = cost.running_cost(state, u);
          gap_psi[i] = hamiltonian_f0(cost, model, state, q) -
                       hamiltonian_fcv(cost, model, state, q, u);
        }
        const double j_full =
            discounted_path_integral(lambda, *view.times, cost_psi);
        const double gap_full =
            discounted_path_integral(lambda, *view.times, gap_psi);
        out[0] = j_full + gap_full;
        out[1] = discounted_path_integral_coarse(lambda, *view.times, cost_psi) +
                 discounted_path_integral_coarse(lambda, *view.times, gap_psi);
        out[2] = gap_full;
        out[3] = j_full;
      });

  FundamentalIdentityResult res;
  res.correction = mm.mean[2];
  res.correction_std_error = mm.std_error[2];
  res.j_value = mm.mean[3];
  res.j_std_error = mm.std_error[3];

  const double v_at_x = v(x);
  VerificationReport rep;
  rep.check_id = "fundamental-identity";
  rep.estimate = v_at_x - mm.mean[0];
  rep.standard_error = mm.std_error[0];
  double tol = 3.0 * rep.standard_error + solver_budget;
  tol += std::abs(mm.mean[0] - mm.mean[1]) / 3.0;  // time quadrature
  const double sup_l = max_abs_running_cost(cost);
  const double f0_span =
      std::max(std::abs(cost.l1_sup), std::abs(cost.l1_inf)) +
      f0_lipschitz_constant(cost, model) * v.g_gradients().cwiseAbs().maxCoeff() +
      std::abs(cost.l2_min()) + 1.0;
  if (std::isfinite(sup_l))  // tails of both truncated integrals
    tol += std::exp(-lambda * horizon) * (sup_l + 2.0 * f0_span) / lambda;
  rep.pass = std::abs(rep.estimate) <= tol;
  {
    std::ostringstream extra;
    extra << "T=" << horizon << " paths=" << n_paths
          << " solver_budget=" << solver_budget << " tol=" << tol;
    rep.inputs_digest = digest(model, seed, extra.str());
  }
  res.report = rep;
  return res;
}

std::vector<VerificationReport> verification_report(
    const SpectralModel& model, const CostSpec& cost, const ValueField& v,
    const Eigen::VectorXd& x, const std::vector<ControlProcess>& candidates,
    const ControlProcess& feedback_policy, const VerificationBudget& budget) {
  std::vector<VerificationReport> reports;
  const double v_at_x = v(x);

  auto j_of = [&](const ControlProcess& u, std::uint64_t seed) {
    return estimate_J(model, cost, x, u, budget.horizon, budget.steps,
                      budget.n_paths, seed);
  };

  int index = 0;
  for (const ControlProcess& u : candidates) {
    const JEstimate j = j_of(u, budget.seed + 101 * index);
    VerificationReport rep;
    rep.check_id = "value-dominance";
    rep.estimate = j.value - v_at_x;  // must be >= -(3 SE + budgets)
    rep.standard_error = j.std_error;
    const double slack = 3.0 * j.std_error + budget.solver_budget +
                         j.tail_bound.value_or(0.0) + j.quadrature_estimate;
    rep.pass = v_at_x <= j.value + slack;
    std::ostringstream extra;
    extra << "candidate=" << index << " J=" << j.value << " v=" << v_at_x;
    rep.inputs_digest = digest(model, budget.seed + 101 * index, extra.str());
    reports.push_back(rep);
    ++index;
  }

  const JEstimate j_fb = j_of(feedback_policy, budget.seed + 977);
  {
    VerificationReport rep;
    rep.check_id = "value-dominance";
    rep.estimate = j_fb.value - v_at_x;
    rep.standard_error = j_fb.std_error;
    const double slack = 3.0 * j_fb.std_error + budget.solver_budget +
                         j_fb.tail_bound.value_or(0.0) + j_fb.quadrature_estimate;
    rep.pass = v_at_x <= j_fb.value + slack;
    std::ostringstream extra;
    extra << "candidate=feedback J=" << j_fb.value << " v=" << v_at_x;
    rep.inputs_digest = digest(model, budget.seed + 977, extra.str());
    reports.push_back(rep);
  }
  {
    VerificationReport rep;
    rep.check_id = "feedback-optimality";
    rep.estimate = v_at_x - j_fb.value;
    rep.standard_error = j_fb.std_error;
    const double tol = 3.0 * j_fb.std_error + budget.solver_budget +
                       j_fb.tail_bound.value_or(0.0) + j_fb.quadrature_estimate;
    rep.pass = std::abs(rep.estimate) <= tol;
    std::ostringstream extra;
    extra << "J_feedback=" << j_fb.value << " v=" << v_at_x << " tol=" << tol;
    rep.inputs_digest = digest(model, budget.seed + 977, extra.str());
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace ouc
