// Deterministic dense two-phase primal simplex.
//
// This is the single LP oracle for the whole toolkit: it classifies models
// as OPTIMAL / INFEASIBLE / UNBOUNDED, returns primal values, duals and
// slacks, and is deterministic by construction (Bland's rule with
// lowest-index tie-breaking, no randomization, fixed tolerance constants).
// Models in this toolkit are tiny (tens of rows), so a dense tableau is the
// simplest correct choice.
//
// Variable bounds are folded into the row system as implicit constraints
// named "<var>__lb"/"<var>__ub" and every structural variable is treated as
// free. That makes the row list the shared currency between the solver and
// infeasibility analysis: any row, bound or explicit, can be a conflict
// member.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orgym/model.hpp"

namespace orgym {

enum class SolveStatus { OPTIMAL, INFEASIBLE, UNBOUNDED, ERROR };

std::string_view to_string(SolveStatus s);
SolveStatus solve_status_from_string(std::string_view s);

struct SolverConfig {
  // A point is feasible when every row violation is at most this.
  double feasibility_tol = 1e-7;
  // Reduced costs above -optimality_tol count as non-negative.
  double optimality_tol = 1e-9;
  // Minimum |pivot| accepted during the ratio test.
  double pivot_tol = 1e-9;
  // Wall-clock budget per solve; exceeding it yields status ERROR.
  double timeout_seconds = 10.0;
  // Hard iteration cap per phase; exceeding it yields status ERROR.
  int max_iterations = 50000;
};

// One row of the unified constraint system: either an explicit model
// constraint (kept in model order) or a finite variable bound (appended
// after, in variable order, lower before upper).
struct PseudoRow {
  std::string name;
  bool is_bound = false;
  std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

std::vector<PseudoRow> build_rows(const LpModel& model);

struct SolveResult {
  SolveStatus status = SolveStatus::ERROR;
  // Set when status == OPTIMAL.
  std::optional<double> objective;
  // OPTIMAL: the optimal vertex. INFEASIBLE: the least-violation point from
  // phase 1, which downstream diagnostics (slack inspection) report on.
  std::map<std::string, double> primal;
  // Dual value per row name (explicit constraints and finite bounds), only
  // when status == OPTIMAL. Sign convention: summing dual * rhs over all
  // rows reproduces the objective (strong duality).
  std::map<std::string, double> duals;
  // Signed slack per explicit constraint at `primal`: rhs - activity for
  // "<=" and "==", activity - rhs for ">=". Negative means violated.
  std::map<std::string, double> slacks;
  // Total constraint violation at `primal` (phase-1 objective); 0 when a
  // feasible point was found.
  double infeasibility = 0.0;
  int iterations = 0;
  std::string message;  // ERROR explanation
};

// Solves the model. Throws InvalidModelError if the model fails check();
// numeric trouble (iteration cap, timeout, singular basis) is reported as
// status ERROR, never as a crash.
SolveResult solve(const LpModel& model, const SolverConfig& cfg = {});

// Convenience: solves the feasibility problem only (objective ignored).
SolveResult solve_feasibility(const LpModel& model, const SolverConfig& cfg = {});

// Feasibility status of an arbitrary pseudo-row subsystem over `num_vars`
// free variables. This is the primitive behind conflict isolation: callers
// pass subsets of build_rows() output and only need OPTIMAL vs INFEASIBLE.
SolveStatus row_system_feasibility(const std::vector<PseudoRow>& rows,
                                   int num_vars, const SolverConfig& cfg = {});

// Slack of every explicit constraint at a given point (same sign convention
// as SolveResult::slacks).
std::map<std::string, double> constraint_slacks(
    const LpModel& model, const std::map<std::string, double>& point);

// Canonical serialization of a result (used by logs and determinism tests).
std::string serialize_result(const SolveResult& r);

}  // namespace orgym
