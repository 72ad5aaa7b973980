#include "ouc/hjb.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ouc/quadrature.hpp"
#include "ouc/semigroup.hpp"

namespace ouc {

namespace {

double phi(double a, double t) {
  if (a == 0.0) return t;
  return -std::expm1(-a * t) / a;
}

// Per-coordinate minimum of s u + (w/2) u^2 over [lo, hi]; fills *arg with
// the (lexicographically smallest) minimizer.
double coordinate_min(double s, double w, double lo, double hi, double* arg) {
  if (w > 0.0) {
    const double u = std::clamp(-s / w, lo, hi);
    if (!std::isfinite(u))
      throw std::invalid_argument(
          "hamiltonian_f0: F0 = -infinity risk (unbounded minimizer)");
    *arg = u;
    return s * u + 0.5 * w * u * u;
  }
  // Linear case: pick the cheaper finite endpoint; ties take the smaller u.
  if (s > 0.0) {
    if (!std::isfinite(lo))
      throw std::invalid_argument(
          "hamiltonian_f0: F0 = -infinity risk (non-coercive l2 on an "
          "unbounded control set)");
    *arg = lo;
    return s * lo;
  }
  if (s < 0.0) {
    if (!std::isfinite(hi))
      throw std::invalid_argument(
          "hamiltonian_f0: F0 = -infinity risk (non-coercive l2 on an "
          "unbounded control set)");
    *arg = hi;
    return s * hi;
  }
  *arg = std::isfinite(lo) ? lo : std::clamp(0.0, lo, hi);
  return 0.0;
}

// Brute-force argmin over the box for a general l2 override (test support;
// control dimension <= 2).
Eigen::VectorXd brute_force_argmin(const CostSpec& cost,
                                   const Eigen::VectorXd& s) {
  const Box& box = cost.control_set;
  const int m = box.dim();
  if (m > 2)
    throw std::invalid_argument(
        "hamiltonian_f0: brute-force minimization supports dim <= 2 only");
  if (!box.bounded())
    throw std::invalid_argument(
        "hamiltonian_f0: general l2 requires a bounded control set");
  const int steps = m == 1 ? 4001 : 257;
  Eigen::VectorXd u(m), best_u(m);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(m, 0);
  while (true) {
    for (int j = 0; j < m; ++j)
      u[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * idx[j] / (steps - 1);
    const double val = s.dot(u) + cost.l2(u);
    if (val < best - 1e-15) {
      best = val;
      best_u = u;
    }
    int j = 0;
    for (; j < m; ++j) {
      if (++idx[j] < steps) break;
      idx[j] = 0;
    }
    if (j == m) break;
  }
  return best_u;
}

// Shared core of F0/argmin given s = L^T q and the value of l1 at x.
double f0_from_s(const CostSpec& cost, double l1_value,
                 const Eigen::VectorXd& s, Eigen::VectorXd* arg) {
  const Box& box = cost.control_set;
  if (cost.l2_override) {
    const Eigen::VectorXd u = brute_force_argmin(cost, s);
    if (arg) *arg = u;
    return l1_value + s.dot(u) + cost.l2(u);
  }
  double total = l1_value;
  Eigen::VectorXd u(box.dim());
  for (int i = 0; i < box.dim(); ++i)
    total += coordinate_min(s[i], cost.l2_weight, box.lo[i], box.hi[i], &u[i]);
  if (arg) *arg = u;
  return total;
}

}  // namespace

double CostSpec::l2_min() const {
  if (l2_override) {
    Eigen::VectorXd u =
        brute_force_argmin(*this, Eigen::VectorXd::Zero(control_set.dim()));
    return l2(u);
  }
  const Eigen::VectorXd u0 =
      control_set.project(Eigen::VectorXd::Zero(control_set.dim()));
  return 0.5 * l2_weight * u0.squaredNorm();
}

CostSpec make_gauss_well_cost(const Eigen::VectorXd& weights, double l2_weight,
                              Box control_set) {
  CostSpec cost;
  Eigen::VectorXd w = weights;
  cost.l1 = [w](const Eigen::VectorXd& x) {
    double s = 0.0;
    for (int k = 0; k < w.size() && k < x.size(); ++k) s += w[k] * x[k];
    return 1.0 - std::exp(-s * s);
  };
  for (int k = 0; k < weights.size(); ++k)
    if (weights[k] != 0.0) cost.l1_support.push_back(k);
  cost.l1_inf = 0.0;
  cost.l1_sup = 1.0;
  cost.l2_weight = l2_weight;
  cost.control_set = std::move(control_set);
  return cost;
}

double hamiltonian_fcv(const CostSpec& cost, const SpectralModel& model,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& u) {
  if (!cost.control_set.contains(u, 1e-12))
    throw std::invalid_argument("hamiltonian_fcv: control outside the "
                                "admissible set");
  return (model.control_map * u).dot(q) + cost.running_cost(x, u);
}

double hamiltonian_f0(const CostSpec& cost, const SpectralModel& model,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& q) {
  const Eigen::VectorXd s = model.control_map.transpose() * q;
  return f0_from_s(cost, cost.l1(x), s, nullptr);
}

Eigen::VectorXd argmin_fcv(const CostSpec& cost, const SpectralModel& model,
                           const Eigen::VectorXd& q) {
  const Eigen::VectorXd s = model.control_map.transpose() * q;
  Eigen::VectorXd u;
  f0_from_s(cost, 0.0, s, &u);
  return u;
}

Eigen::VectorXd feedback_map(const CostSpec& cost, const SpectralModel& model,
                             const ValueField& v, const Eigen::VectorXd& x) {
  return argmin_fcv(cost, model, v.g_gradient_full(x, model.n_modes()));
}

double f0_lipschitz_constant(const CostSpec& cost, const SpectralModel& model) {
  const Box& box = cost.control_set;
  if (!box.bounded())
    throw std::invalid_argument(
        "f0_lipschitz_constant: requires a bounded control set");
  const int m = box.dim();
  double best = 0.0;
  Eigen::VectorXd u(m);
  for (int mask = 0; mask < (1 << m); ++mask) {
    for (int j = 0; j < m; ++j) u[j] = (mask >> j) & 1 ? box.hi[j] : box.lo[j];
    best = std::max(best, (model.control_map * u).norm());
  }
  return best;
}

double default_half_width(const SpectralModel& model, int m_lead) {
  const double horizon = 2.0 / model.lambda;
  double s = 0.0;
  for (int k = 0; k < m_lead; ++k) {
    const double var = model.sigma_diag[k] * model.sigma_diag[k] *
                       phi(2.0 * model.mu[k], horizon);
    s = std::max(s, std::sqrt(var));
  }
  return 5.0 * s;
}

ControlProcess make_feedback_control(const CostSpec& cost,
                                     const SpectralModel& model,
                                     const ValueField& v) {
  return ControlProcess::feedback(
      [cost, model, v](const Eigen::VectorXd& x) {
        return feedback_map(cost, model, v, x);
      },
      cost.control_set);
}

namespace {

// One application of the fixed-point map to (v, dg) on the grid, writing
// into out_v / out_dg.  Shared by the iteration and the a-posteriori
// residual evaluation.
struct MapApplication {
  const SpectralModel* model;
  const CostSpec* cost;
  const ValueField* field;  // current iterate (v, dg)
  QuadratureRule time_rule;
  QuadratureRule gh;
  int m_lead;

  // Per time node, per leading mode: decay, std dev, Bismut factor.
  Eigen::MatrixXd decay, sd, bismut;
  Eigen::VectorXd discount;  // w_s * e^{-lambda s}
  Eigen::MatrixXd l_lead_t;  // m x m_lead block of L^T

  double f_sup = 0.0;  // sup |F| over all evaluations (for tail bounds)

  void prepare(const SpectralModel& m, const CostSpec& c, int lead,
               int time_levels, int gl_points, int gh_order) {
    model = &m;
    cost = &c;
    m_lead = lead;
    const double t_max =
        std::max(10.0 / m.lambda, 10.0 * m.slowest_timescale());
    time_rule = graded_rule(t_max, time_levels, gl_points);
    gh = gauss_hermite(gh_order);
    const int ns = static_cast<int>(time_rule.nodes.size());
    decay.resize(ns, lead);
    sd.resize(ns, lead);
    bismut.resize(ns, lead);
    discount.resize(ns);
    for (int si = 0; si < ns; ++si) {
      const double s = time_rule.nodes[si];
      discount[si] = time_rule.weights[si] * std::exp(-m.lambda * s);
      for (int j = 0; j < lead; ++j) {
        decay(si, j) = std::exp(-m.mu[j] * s);
        const double q =
            m.sigma_diag[j] * m.sigma_diag[j] * phi(2.0 * m.mu[j], s);
        sd(si, j) = std::sqrt(q);
        bismut(si, j) = decay(si, j) * m.g_diag[j];
      }
    }
    l_lead_t = m.control_map.topRows(lead).transpose();
  }

  // F(y) = F_0(y, dg(y)) for a leading-mode point y.
  double f_at(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd q_lead = field->g_gradient(y);
    const Eigen::VectorXd s = l_lead_t * q_lead;
    return f0_from_s(*cost, cost->l1(y), s, nullptr);
  }

  // Evaluate the map at one grid node; returns (value, dg components).
  void at_node(const Eigen::VectorXd& x, double* out_v,
               Eigen::VectorXd* out_dg, double* local_fsup) const {
    const int order = static_cast<int>(gh.nodes.size());
    const double norm = std::pow(M_PI, -0.5 * m_lead);
    double v_acc = 0.0;
    Eigen::VectorXd dg_acc = Eigen::VectorXd::Zero(m_lead);
    Eigen::VectorXd y(m_lead), mean(m_lead);
    std::vector<int> idx(m_lead, 0);
    for (int si = 0; si < static_cast<int>(time_rule.nodes.size()); ++si) {
      for (int j = 0; j < m_lead; ++j) mean[j] = decay(si, j) * x[j];
      const double f_mean = f_at(mean);
      double ev = 0.0;
      Eigen::VectorXd eg = Eigen::VectorXd::Zero(m_lead);
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        double w = 1.0;
        for (int j = 0; j < m_lead; ++j) {
          y[j] = mean[j] + M_SQRT2 * sd(si, j) * gh.nodes[idx[j]];
          w *= gh.weights[idx[j]];
        }
        const double fv = f_at(y);
        *local_fsup = std::max(*local_fsup, std::abs(fv));
        ev += w * fv;
        const double centered = fv - f_mean;
        for (int j = 0; j < m_lead; ++j)
          eg[j] += w * centered * M_SQRT2 * gh.nodes[idx[j]] / sd(si, j);
        int j = 0;
        for (; j < m_lead; ++j) {
          if (++idx[j] < order) break;
          idx[j] = 0;
        }
        if (j == m_lead) break;
      }
      v_acc += discount[si] * norm * ev;
      for (int j = 0; j < m_lead; ++j)
        dg_acc[j] += discount[si] * norm * bismut(si, j) * eg[j];
    }
    *out_v = v_acc;
    *out_dg = dg_acc;
  }

  // Apply to every node of `next` (which shares the grid of *field).
  void apply(ValueField* next) {
    const int n_nodes = next->n_nodes();
    std::atomic<int> cursor{0};
    const int threads =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<double> fsups(threads, 0.0);
    auto work = [&](int tid) {
      Eigen::VectorXd dg(m_lead);
      for (int i = cursor.fetch_add(1); i < n_nodes; i = cursor.fetch_add(1)) {
        double v;
        at_node(next->node_coords(i), &v, &dg, &fsups[tid]);
        next->values()[i] = v;
        next->g_gradients().row(i) = dg.transpose();
      }
    };
    if (threads == 1 || n_nodes < 64) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& t : pool) t.join();
    }
    for (double s : fsups) f_sup = std::max(f_sup, s);
  }
};

}  // namespace

HjbSolution solve_mild_hjb(const SpectralModel& model, const CostSpec& cost,
                           const GridSpec& grid, const SolveOptions& opts) {
  const int lead = grid.m_lead;
  if (lead < 1 || lead > 3)
    throw std::invalid_argument("solve_mild_hjb: m_lead must be 1, 2 or 3");
  if (lead > model.n_modes())
    throw std::invalid_argument("solve_mild_hjb: m_lead exceeds the truncation");
  for (int k : cost.l1_support)
    if (k >= lead)
      throw std::invalid_argument(
          "solve_mild_hjb: running cost reads a mode outside the leading "
          "block");
  {
    const ConditionReport h2 = check_smoothing(model);
    if (!h2.satisfied)
      throw std::invalid_argument(
          "solve_mild_hjb: model failed the smoothing audit (H2): " +
          h2.detail);
  }

  // Contraction estimate C_F0 * int_0^inf e^{-lambda s} |Gamma_G(s)| ds.
  const double c_f0 = f0_lipschitz_constant(cost, model);
  const double lambda = model.lambda;
  double rho = 0.0;
  {
    const double t_max = std::max(10.0 / lambda, 10.0 * model.slowest_timescale());
    const QuadratureRule rule = graded_rule(t_max, 40, 8);
    double integral = 0.0;
    for (int i = 0; i < rule.nodes.size(); ++i)
      integral += rule.weights[i] * std::exp(-lambda * rule.nodes[i]) *
                  gamma_norm(model, rule.nodes[i]);
    const double s0 = t_max * std::pow(0.5, 40);
    integral += 2.0 * s0 * gamma_norm(model, s0);                  // origin stub
    integral += gamma_norm(model, t_max) * std::exp(-lambda * t_max) / lambda;
    rho = c_f0 * integral;
  }
  if (rho >= 1.0) {
    std::ostringstream msg;
    msg << "solve_mild_hjb: lambda below solvable threshold (contraction "
           "constant "
        << rho << " >= 1)";
    throw std::invalid_argument(msg.str());
  }

  const double half_width = grid.half_width > 0.0
                                ? grid.half_width
                                : default_half_width(model, lead);
  ValueField current(lead, half_width, grid.nodes_per_dim);
  ValueField next = current;

  MapApplication map;
  map.prepare(model, cost, lead, opts.time_levels, opts.gl_points,
              opts.gh_order);

  // Iteration 0 initializes from the zero field (so constant costs converge
  // immediately after the first genuine iteration).
  map.field = &current;
  map.apply(&next);
  std::swap(current, next);

  SolveInfo info;
  info.rho_analytic = rho;
  info.c_f0 = c_f0;
  double prev_change = -1.0;
  bool converged = false;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    map.field = &current;
    map.apply(&next);
    const double dv = (next.values() - current.values()).cwiseAbs().maxCoeff();
    const double dq =
        (next.g_gradients() - current.g_gradients()).cwiseAbs().maxCoeff();
    const double change = std::max(dv, dq);
    std::swap(current, next);
    info.iterations = iter;
    info.final_change = change;
    if (prev_change > 0.0)
      info.rho_measured =
          std::max(info.rho_measured, change / prev_change);
    prev_change = change;
    if (change < opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("solve_mild_hjb: max_iter exceeded before the "
                             "tolerance was reached");

  // A-posteriori residual with a refined quadrature; the fixed-point error
  // is bounded by residual/(1 - rho).
  MapApplication fine;
  fine.prepare(model, cost, lead, opts.time_levels + 6, opts.gl_points + 2,
               opts.gh_order + 8);
  fine.field = &current;
  ValueField refined = current;
  fine.apply(&refined);
  const double rv = (refined.values() - current.values()).cwiseAbs().maxCoeff();
  const double rq =
      (refined.g_gradients() - current.g_gradients()).cwiseAbs().maxCoeff();
  info.posterior_residual = std::max(rv, rq);
  info.f0_sup = fine.f_sup;

  const double t_max = std::max(10.0 / lambda, 10.0 * model.slowest_timescale());
  info.tail_bound = fine.f_sup * std::exp(-lambda * t_max) / lambda +
                    fine.f_sup * t_max * std::pow(0.5, opts.time_levels);
  info.error_budget =
      (info.posterior_residual + info.tail_bound) / (1.0 - rho);

  HjbSolution sol;
  sol.value = std::move(current);
  sol.info = info;
  return sol;
}

double strict_form_residual(const SpectralModel& model, const CostSpec& cost,
                            const ValueField& v, const Eigen::VectorXd& x,
                            double h, int gh_order) {
  for (int j = 0; j < v.m_lead(); ++j)
    if (std::abs(x[j]) > v.half_width() * (1.0 + 1e-12))
      throw std::invalid_argument("strict_form_residual: x outside the grid");
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(model.n_modes());
  const SemigroupScheme gh = SemigroupScheme::gauss_hermite(gh_order);
  const double v0 = v(x);
  const double r_h =
      (apply_semigroup(model, zero, v, h, x, gh) - v0) / h;
  const double r_h2 =
      (apply_semigroup(model, zero, v, 0.5 * h, x, gh) - v0) / (0.5 * h);
  const double a_value = 2.0 * r_h2 - r_h;  // Richardson in h
  const double f0 =
      hamiltonian_f0(cost, model, x, v.g_gradient_full(x, model.n_modes()));
  return model.lambda * v0 - a_value - f0;
}

}  // namespace ouc
