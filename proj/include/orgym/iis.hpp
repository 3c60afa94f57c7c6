// Irreducible infeasible subsystem (IIS) computation via deletion filtering.
#pragma once

#include <string>
#include <vector>

#include "orgym/jsonio.hpp"
#include "orgym/model.hpp"
#include "orgym/solver.hpp"

namespace orgym {

// A minimal certificate of infeasibility: a set of pseudo-row names (explicit
// constraints plus `<var>__lb` / `<var>__ub` bound rows) whose induced
// subsystem is infeasible while every proper subset is feasible.
struct IisReport {
  // Member row names in deletion-filter order (model constraint order, then
  // variable bounds in variable order, lower before upper).
  std::vector<std::string> members;
  int size = 0;

  bool contains(const std::string& name) const;
  // Members that are explicit constraints, i.e. excluding bound pseudo-rows.
  // Commercial solvers report conflicting constraints and conflicting bounds
  // separately; this is the constraints-only view.
  std::vector<std::string> explicit_constraint_members() const;

  void write(JsonWriter& w) const;
  static IisReport parse(const Json& j);
};

// Deletion filter: walk the pseudo-rows in order, tentatively delete each,
// and keep it deleted iff the remainder is still infeasible. The surviving
// rows form an irreducible infeasible subsystem. Deterministic by
// construction (fixed walk order, deterministic solver).
//
// Throws NotInfeasibleError when the model is not INFEASIBLE and
// SolverTimeoutError if a feasibility probe breaks down.
IisReport compute_iis(const LpModel& model, const SolverConfig& cfg = {});

// Checks both IIS invariants against the model: the induced subsystem
// (member rows only; non-member bounds relaxed) is infeasible, and every
// leave-one-out subset is feasible.
bool iis_invariants_hold(const LpModel& model, const IisReport& iis,
                         const SolverConfig& cfg = {});

}  // namespace orgym
