#include "kvrobin/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "kvrobin/error.hpp"

namespace kvrobin {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Zero the components that would push a boxed value further out of its box.
void mask_active(std::vector<double>& dir, const std::vector<double>& x, const CoefficientBounds& box,
                 std::size_t boxed, bool descent_sign) {
  for (std::size_t i = 0; i < boxed; ++i) {
    const double move = descent_sign ? -dir[i] : dir[i];
    if ((x[i] <= box.lower && move < 0.0) || (x[i] >= box.upper && move > 0.0)) dir[i] = 0.0;
  }
}

bool stagnated(const std::vector<HistoryRow>& h, const StopConfig& stop) {
  if (static_cast<int>(h.size()) <= stop.window) return false;
  const double old = h[h.size() - 1 - static_cast<std::size_t>(stop.window)].J;
  return old - h.back().J <= stop.stagnation_tol * std::abs(old);
}

struct LineSearchResult {
  bool accepted = false;
  bool first_try = false;
  double t = 0.0;
  std::optional<RobinCoefficient> q;
  ObjectiveEvaluation eval;
};

// Armijo backtracking along t -> make(t), which returns the projected trial
// and its displacement in the optimisation variables. Rejected trials shrink
// t by safeguarded quadratic interpolation.
template <typename Make>
LineSearchResult backtrack(const ObjectiveFunction& objective, const ObjectiveEvaluation& current,
                           const std::vector<double>& grad, double t, const LineSearchConfig& ls, Make&& make) {
  LineSearchResult out;
  for (int trial = 0; trial <= ls.max_halvings; ++trial) {
    auto [q, delta] = make(t);
    if (max_abs(delta) == 0.0) break;
    const double slope = dot(grad, delta);
    if (!(slope < 0.0)) break;
    ObjectiveEvaluation ev = objective.evaluate(q, true);
    if (ev.total <= current.total + ls.armijo_c1 * slope) {
      out.accepted = true;
      out.first_try = trial == 0;
      out.t = t;
      out.q = std::move(q);
      out.eval = std::move(ev);
      return out;
    }
    const double curvature = ev.total - current.total - slope;
    double shrink = ls.backtrack;
    if (curvature > 0.0 && std::isfinite(curvature)) shrink = std::clamp(-slope / (2.0 * curvature), 0.1, ls.backtrack);
    t *= shrink;
  }
  return out;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_iterations < 0) throw ValidationError("max_iterations must be non-negative");
  const auto& ls = line_search;
  if (!(ls.initial_step > 0.0 && ls.max_step > 0.0 && ls.backtrack > 0.0 && ls.backtrack < 1.0 &&
        ls.max_halvings > 0 && ls.armijo_c1 > 0.0 && ls.enlarge_factor > 0.0)) {
    throw ValidationError("line search parameters must be positive (backtrack in (0,1))");
  }
  if (cg_restart_period < 1) throw ValidationError("cg_restart_period must be at least 1");
  if (stop.window < 1) throw ValidationError("stagnation window must be at least 1");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::Stagnation: return "stagnation";
    case Termination::Budget: return "budget";
    case Termination::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

HistoryRow record_history(int k, const ObjectiveEvaluation& eval, const RobinCoefficient& q,
                          const RobinCoefficient* q_dag, double step, double grad_norm) {
  HistoryRow row;
  row.k = k;
  row.J = eval.total;
  row.J_energy = eval.energy_misfit;
  row.J_robin = eval.robin_misfit;
  row.J_l2 = eval.l2_penalty;
  row.e_q = q_dag ? relative_error_eq(q, *q_dag) : std::numeric_limits<double>::quiet_NaN();
  row.step = step;
  row.grad_norm = grad_norm;
  return row;
}

InversionResult solve_known_partition(const ObjectiveFunction& objective, const AdmissibleSetA& set,
                                      const OptimizerConfig& config, const RobinCoefficient* q_dag) {
  config.validate();
  if (!config.initial_guess) throw ValidationError("optimizer needs an initial guess");
  RobinCoefficient q = project_box(*config.initial_guess, set.bounds);
  if (!set.contains(q)) throw ValidationError("initial guess does not use the admissible partition");
  const auto& box = set.bounds;
  const std::size_t n = q.piece_count();

  auto projected = [&](const std::vector<double>& g) {
    auto pg = g;
    mask_active(pg, q.values(), box, n, true);
    return pg;
  };

  ObjectiveEvaluation ev = objective.evaluate(q, true);
  std::vector<double> pg = projected(ev.piece_gradients);
  const double g0 = max_abs(pg);
  InversionResult res{q, {}, Termination::Budget, 0, ev.total};
  res.history.push_back(record_history(0, ev, q, q_dag, 0.0, g0));

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
  double t_prev = config.line_search.initial_step;
  double t_max = config.line_search.max_step;
  bool expand = false;

  for (int k = 0;; ++k) {
    const double gnorm = max_abs(pg);
    if (gnorm <= std::max(config.stop.gradient_rel_tol * g0, config.stop.gradient_abs_tol)) {
      res.reason = Termination::GradientTolerance;
      break;
    }
    if (k >= config.max_iterations) {
      res.reason = Termination::Budget;
      break;
    }
    if (k == config.line_search.enlarge_after) t_max *= config.line_search.enlarge_factor;
    mask_active(d, q.values(), box, n, false);
    if (dot(ev.piece_gradients, d) >= 0.0 || max_abs(d) == 0.0) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
    }
    const double dnorm = max_abs(d);

    const double t0 = std::min(expand ? 2.0 * t_prev : t_prev, t_max);
    auto step = backtrack(objective, ev, ev.piece_gradients, t0, config.line_search, [&](double t) {
      std::vector<double> x = q.values();
      std::vector<double> delta(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::clamp(x[i] + t * d[i] / dnorm, box.lower, box.upper);
        delta[i] = x[i] - q.values()[i];
      }
      return std::pair{q.with_values(std::move(x)), std::move(delta)};
    });
    if (!step.accepted) {
      res.reason = Termination::LineSearchFailed;
      break;
    }
    const double t = step.t;
    t_prev = t;
    expand = step.first_try;
    q = std::move(*step.q);
    ev = std::move(step.eval);
    std::vector<double> pg_new = projected(ev.piece_gradients);
    const double beta = (k + 1) % config.cg_restart_period == 0 ? 0.0 : dot(pg_new, pg_new) / dot(pg, pg);
    for (std::size_t i = 0; i < n; ++i) d[i] = -pg_new[i] + beta * d[i];
    pg = std::move(pg_new);
    res.iterations = k + 1;
    res.history.push_back(record_history(k + 1, ev, q, q_dag, t / dnorm, max_abs(pg)));
    if (stagnated(res.history, config.stop)) {
      res.reason = Termination::Stagnation;
      break;
    }
  }
  res.q_star = q;
  res.final_J = ev.total;
  return res;
}

InversionResult solve_unknown_partition(const ObjectiveFunction& objective, const AdmissibleSetB& set,
                                        const OptimizerConfig& config, const RobinCoefficient* q_dag) {
  config.validate();
  if (!config.initial_guess) throw ValidationError("optimizer needs an initial guess");
  RobinCoefficient q = *config.initial_guess;
  if (!set.contains(q)) throw ValidationError("initial guess is not in the admissible set");
  const double length = q.length();
  const auto& box = set.bounds;

  // Free values first (boxed), then breakpoints normalised by |Γ_i|.
  std::vector<std::size_t> free_pieces;
  for (std::size_t j = 0; j < q.piece_count(); ++j) {
    if (!(config.fix_background && q.values()[j] == config.background)) free_pieces.push_back(j);
  }
  const std::size_t nv = free_pieces.size();
  const std::size_t nb = config.move_breakpoints ? q.breakpoints().size() : 0;

  auto variables = [&](const RobinCoefficient& c) {
    std::vector<double> x;
    for (std::size_t j : free_pieces) x.push_back(c.values()[j]);
    for (std::size_t j = 0; j < nb; ++j) x.push_back(c.breakpoints()[j] / length);
    return x;
  };
  auto gradient = [&](const ObjectiveEvaluation& e) {
    std::vector<double> g;
    for (std::size_t j : free_pieces) g.push_back(e.piece_gradients[j]);
    for (std::size_t j = 0; j < nb; ++j) g.push_back(e.breakpoint_gradients[j] * length);
    return g;
  };
  auto build = [&](const std::vector<double>& x) {
    std::vector<double> values = q.values();
    for (std::size_t i = 0; i < nv; ++i) values[free_pieces[i]] = x[i];
    std::vector<double> b = q.breakpoints();
    for (std::size_t j = 0; j < nb; ++j) b[j] = x[nv + j] * length;
    // Keep breakpoints strictly inside and ordered before the partition repair.
    for (double& bj : b) bj = std::clamp(bj, 0.0, length);
    std::sort(b.begin(), b.end());
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double floor = (j == 0 ? 0.0 : b[j - 1]);
      if (!(b[j] > floor)) b[j] = std::nextafter(floor, length);
    }
    if (!b.empty() && !(b.back() < length)) {
      for (std::size_t j = b.size(); j-- > 0;) {
        const double ceil = (j + 1 == b.size() ? length : b[j + 1]);
        if (!(b[j] < ceil)) b[j] = std::nextafter(ceil, 0.0);
      }
    }
    return project_partition_constraints(RobinCoefficient(length, std::move(b), std::move(values), box), set);
  };

  ObjectiveEvaluation ev = objective.evaluate(q, true);
  auto pgrad = [&](const ObjectiveEvaluation& e) {
    auto g = gradient(e);
    mask_active(g, variables(q), box, nv, true);
    return g;
  };
  std::vector<double> pg = pgrad(ev);
  const double g0 = max_abs(pg);
  InversionResult res{q, {}, Termination::Budget, 0, ev.total};
  res.history.push_back(record_history(0, ev, q, q_dag, 0.0, g0));
  double t_prev = config.line_search.initial_step;
  double t_max = config.line_search.max_step;
  bool expand = false;

  for (int k = 0;; ++k) {
    const double gnorm = max_abs(pg);
    if (gnorm <= std::max(config.stop.gradient_rel_tol * g0, config.stop.gradient_abs_tol)) {
      res.reason = Termination::GradientTolerance;
      break;
    }
    if (k >= config.max_iterations) {
      res.reason = Termination::Budget;
      break;
    }
    if (k == config.line_search.enlarge_after) t_max *= config.line_search.enlarge_factor;
    const std::vector<double> x0 = variables(q);
    const std::vector<double> g = gradient(ev);

    const double t0 = std::min(expand ? 2.0 * t_prev : t_prev, t_max);
    auto step = backtrack(objective, ev, g, t0, config.line_search, [&](double t) {
      std::vector<double> x = x0;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= t * pg[i] / gnorm;
      for (std::size_t i = 0; i < nv; ++i) x[i] = std::clamp(x[i], box.lower, box.upper);
      RobinCoefficient trial = build(x);
      const auto xt = variables(trial);
      std::vector<double> delta(x0.size());
      for (std::size_t i = 0; i < x0.size(); ++i) delta[i] = xt[i] - x0[i];
      return std::pair{std::move(trial), std::move(delta)};
    });
    if (!step.accepted) {
      res.reason = Termination::LineSearchFailed;
      break;
    }
    const double t = step.t;
    t_prev = t;
    expand = step.first_try;
    q = std::move(*step.q);
    ev = std::move(step.eval);
    pg = pgrad(ev);
    res.iterations = k + 1;
    res.history.push_back(record_history(k + 1, ev, q, q_dag, t / gnorm, max_abs(pg)));
    if (stagnated(res.history, config.stop)) {
      res.reason = Termination::Stagnation;
      break;
    }
  }
  res.q_star = q;
  res.final_J = ev.total;
  return res;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows) {
  out << "k,J,J_energy,J_robin,J_l2,e_q,step\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.k << ',' << r.J << ',' << r.J_energy << ',' << r.J_robin << ',' << r.J_l2 << ',';
    if (std::isnan(r.e_q)) {
      out << "nan";
    } else {
      out << r.e_q;
    }
    out << ',' << r.step << '\n';
  }
}

std::vector<HistoryRow> read_history_csv(std::istream& in) {
  std::vector<HistoryRow> rows;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "k,J,J_energy,J_robin,J_l2,e_q,step") throw ValidationError("unexpected history CSV header");
      header = true;
      continue;
    }
    std::istringstream s(line);
    std::vector<std::string> f;
    for (std::string cell; std::getline(s, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw ValidationError("history CSV row needs 7 fields");
    HistoryRow r;
    r.k = std::stoi(f[0]);
    r.J = std::stod(f[1]);
    r.J_energy = std::stod(f[2]);
    r.J_robin = std::stod(f[3]);
    r.J_l2 = std::stod(f[4]);
    r.e_q = std::stod(f[5]);
    r.step = std::stod(f[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kvrobin
