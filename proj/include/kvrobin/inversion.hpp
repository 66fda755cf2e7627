#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "kvrobin/objective.hpp"

namespace kvrobin {

struct LineSearchConfig {
  double initial_step = 0.1;  // max-norm displacement of the first trial
  double max_step = 0.5;
  double backtrack = 0.5;
  int max_halvings = 30;
  double armijo_c1 = 1e-4;
  int enlarge_after = 1000;  // iteration after which max_step is multiplied
  double enlarge_factor = 4.0;
};

struct StopConfig {
  double gradient_rel_tol = 1e-8;   // relative to the initial projected gradient
  double gradient_abs_tol = 1e-10;
  double stagnation_tol = 1e-12;    // relative J decrease over the window
  int window = 50;
};

struct OptimizerConfig {
  int max_iterations = 500;
  std::optional<RobinCoefficient> initial_guess;
  LineSearchConfig line_search;
  int cg_restart_period = 10;
  bool fix_background = false;
  double background = 1.0;
  bool move_breakpoints = true;  // unknown partition only; false = values only
  StopConfig stop;

  void validate() const;
};

enum class Termination : std::uint8_t { GradientTolerance, Stagnation, Budget, LineSearchFailed };
std::string_view to_string(Termination t);

struct HistoryRow {
  int k = 0;
  double J = 0.0;
  double J_energy = 0.0;
  double J_robin = 0.0;
  double J_l2 = 0.0;
  double e_q = 0.0;  // NaN when no ground truth is supplied
  double step = 0.0;
  double grad_norm = 0.0;  // max-norm of the projected gradient
};

struct InversionResult {
  RobinCoefficient q_star = RobinCoefficient::constant(2.0, 1.0);
  std::vector<HistoryRow> history;
  Termination reason = Termination::Budget;
  int iterations = 0;
  double final_J = 0.0;
};

HistoryRow record_history(int k, const ObjectiveEvaluation& eval, const RobinCoefficient& q,
                          const RobinCoefficient* q_dag, double step, double grad_norm);

/// Projected Fletcher-Reeves CG over the piece values on a fixed partition,
/// backtracking Armijo line search.
InversionResult solve_known_partition(const ObjectiveFunction& objective, const AdmissibleSetA& set,
                                      const OptimizerConfig& config, const RobinCoefficient* q_dag = nullptr);

/// Projected gradient descent over free piece values and breakpoints.
InversionResult solve_unknown_partition(const ObjectiveFunction& objective, const AdmissibleSetB& set,
                                        const OptimizerConfig& config, const RobinCoefficient* q_dag = nullptr);

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows);
/// Reads the columns written by write_history_csv; `#` lines are skipped.
std::vector<HistoryRow> read_history_csv(std::istream& in);

}  // namespace kvrobin
