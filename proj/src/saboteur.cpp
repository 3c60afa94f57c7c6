#include "orgym/saboteur.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "orgym/errors.hpp"
#include "orgym/parallel.hpp"

namespace orgym {

std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
    case Difficulty::Expert: return "expert";
  }
  return "easy";
}

Difficulty difficulty_from_string(std::string_view s) {
  if (s == "easy") return Difficulty::Easy;
  if (s == "medium") return Difficulty::Medium;
  if (s == "hard") return Difficulty::Hard;
  if (s == "expert") return Difficulty::Expert;
  throw ParseError("unknown difficulty: " + std::string(s));
}

const std::vector<ErrorTypeInfo>& error_type_table() {
  static const std::vector<ErrorTypeInfo> table = {
      {'A', "Direction Flip", 2, 3, Difficulty::Easy},
      {'B', "RHS Miscalculation", 3, 5, Difficulty::Medium},
      {'C', "Upper Bound Conflict", 2, 3, Difficulty::Easy},
      {'D', "Lower Bound Conflict", 2, 4, Difficulty::Easy},
      {'E', "Resource Over-allocation", 5, 8, Difficulty::Hard},
      {'F', "Capacity Violation", 5, 7, Difficulty::Hard},
      {'G', "Flow Imbalance", 6, 10, Difficulty::Hard},
      {'H', "Multi-constraint Conflict", 8, 12, Difficulty::Expert},
      {'I', "Composite Error", 10, 15, Difficulty::Expert},
  };
  return table;
}

const ErrorTypeInfo& error_type_info(char code) {
  for (const ErrorTypeInfo& t : error_type_table()) {
    if (t.code == code) return t;
  }
  throw InvalidModelError(std::string("unknown error type code: ") + code);
}

void SabotageConfig::check() const {
  if (!(alpha > 1.0)) throw InvalidModelError("sabotage alpha must be > 1");
  if (num_candidates < 1) throw InvalidModelError("num_candidates must be >= 1");
  if (max_regenerations < 0) throw InvalidModelError("max_regenerations must be >= 0");
}

namespace {

constexpr double kObjTol = 1e-6;

// Solve + conflict isolation in one step; nullopt when not INFEASIBLE.
std::optional<IisReport> infeasible_iis(const LpModel& m) {
  if (solve(m).status != SolveStatus::INFEASIBLE) return std::nullopt;
  return compute_iis(m);
}

bool all_positive_terms(const Constraint& c) {
  return std::all_of(c.terms.begin(), c.terms.end(),
                     [](const auto& t) { return t.second > 0.0; });
}

// ---- Type A: flip the sense of a tight-ish constraint -----------------

std::optional<Injection> inject_flip(const LpModel& model, const SolveResult& base,
                                     const SabotageConfig& cfg) {
  // Candidates ordered by |slack| ascending (tightest first), stable on ties.
  std::vector<const Constraint*> cands;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::EQ) cands.push_back(&c);
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Constraint* a, const Constraint* b) {
    return std::fabs(base.slacks.at(a->name)) < std::fabs(base.slacks.at(b->name));
  });
  if (static_cast<int>(cands.size()) > cfg.num_candidates) {
    cands.resize(static_cast<std::size_t>(cfg.num_candidates));
  }

  for (const Constraint* c : cands) {
    LpModel sab = apply_edit(model, ModelEdit::flip_sense(c->name));
    const auto iis = infeasible_iis(sab);
    if (!iis || !iis->contains(c->name)) continue;
    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {c->name};
    inj.gt.fix = {ModelEdit::flip_sense(c->name)};
    inj.gt.iis_gt = *iis;
    inj.gt.original_objective = *base.objective;
    return inj;
  }
  return std::nullopt;
}

// ---- Type B: shrink a <= rhs below the row's minimum attainable activity

std::optional<Injection> inject_rhs_shrink(const LpModel& model,
                                           const SolveResult& base,
                                           const SabotageConfig& cfg) {
  int tried = 0;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::LE || c.terms.size() < 2) continue;
    if (++tried > cfg.num_candidates) break;

    // Minimum activity of the row's expression subject to everything else.
    LpModel probe = model;
    probe.objective_sense = ObjSense::MIN;
    for (Variable& v : probe.variables) {
      const auto it = c.terms.find(v.name);
      v.obj_coeff = it == c.terms.end() ? 0.0 : it->second;
    }
    probe.constraints.erase(
        std::remove_if(probe.constraints.begin(), probe.constraints.end(),
                       [&](const Constraint& x) { return x.name == c.name; }),
        probe.constraints.end());
    const SolveResult r = solve(probe);
    if (r.status != SolveStatus::OPTIMAL) continue;  // activity unbounded below

    const double mu = *r.objective;
    const double gap = std::max(1.0, 0.15 * std::max(std::fabs(mu), std::fabs(c.rhs)));
    const double new_rhs = mu - gap;
    if (new_rhs >= c.rhs) continue;

    LpModel sab = apply_edit(model, ModelEdit::set_rhs(c.name, new_rhs));
    const auto iis = infeasible_iis(sab);
    if (!iis || !iis->contains(c.name)) continue;
    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {c.name};
    inj.gt.fix = {ModelEdit::relax(c.name, c.rhs - new_rhs)};
    inj.gt.iis_gt = *iis;
    inj.gt.original_objective = *base.objective;
    return inj;
  }
  return std::nullopt;
}

// ---- Type C: 4-tier upper-bound conflict ------------------------------

std::optional<Injection> check_rewrite_candidate(const LpModel& model,
                                                 const SolveResult& base,
                                                 const Constraint& original,
                                                 const Constraint& rewritten) {
  LpModel sab = apply_edit(model, ModelEdit::rewrite(rewritten));
  const auto iis = infeasible_iis(sab);
  if (!iis || !iis->contains(original.name)) return std::nullopt;
  Injection inj;
  inj.sabotaged = std::move(sab);
  inj.gt.key_constraints = {original.name};
  inj.gt.fix = {ModelEdit::rewrite(original)};
  inj.gt.iis_gt = *iis;
  inj.gt.original_objective = *base.objective;
  return inj;
}

std::optional<Injection> inject_upper_bound_conflict(const LpModel& model,
                                                     const SolveResult& base,
                                                     const SabotageConfig& cfg) {
  (void)cfg;
  // Tier 1: >= rows by |dual| descending; delete positive-coefficient terms
  // one at a time (largest first), keeping at least one term.
  {
    std::vector<const Constraint*> rows;
    for (const Constraint& c : model.constraints) {
      if (c.sense == Sense::GE && c.terms.size() >= 2) rows.push_back(&c);
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const Constraint* a, const Constraint* b) {
      return std::fabs(base.duals.at(a->name)) > std::fabs(base.duals.at(b->name));
    });
    for (const Constraint* c : rows) {
      Constraint work = *c;
      for (;;) {
        if (work.terms.size() < 2) break;
        // Largest positive coefficient; name ascending on ties (map order).
        auto victim = work.terms.end();
        for (auto it = work.terms.begin(); it != work.terms.end(); ++it) {
          if (it->second <= 0.0) continue;
          if (victim == work.terms.end() || it->second > victim->second) victim = it;
        }
        if (victim == work.terms.end()) break;
        work.terms.erase(victim);
        if (auto inj = check_rewrite_candidate(model, base, *c, work)) return inj;
      }
    }
  }
  // Tier 2: <= rows with positive coefficients sign-flipped.
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::LE) continue;
    Constraint work = c;
    bool changed = false;
    for (auto& [name, coeff] : work.terms) {
      if (coeff > 0.0) {
        coeff = -coeff;
        changed = true;
      }
    }
    if (!changed) continue;
    if (auto inj = check_rewrite_candidate(model, base, c, work)) return inj;
  }
  // Tier 3: scale an inequality row's coefficients by 10.
  for (const Constraint& c : model.constraints) {
    if (c.sense == Sense::EQ) continue;
    Constraint work = c;
    for (auto& [name, coeff] : work.terms) coeff *= 10.0;
    if (auto inj = check_rewrite_candidate(model, base, c, work)) return inj;
  }
  // Tier 4 (guaranteed): pin the widest-range variable between x* and x*+1.
  {
    int best = 0;
    double best_range = -1.0;
    for (std::size_t i = 0; i < model.variables.size(); ++i) {
      const Variable& v = model.variables[i];
      const double range = v.upper - v.lower;  // +inf dominates
      if (range > best_range) {
        best_range = range;
        best = static_cast<int>(i);
      }
    }
    const Variable& v = model.variables[static_cast<std::size_t>(best)];
    const double star = base.primal.at(v.name);
    std::string cap_name = "extra_cap_" + v.name;
    std::string floor_name = "extra_floor_" + v.name;
    while (model.find_constraint(cap_name) != nullptr) cap_name += "_x";
    while (model.find_constraint(floor_name) != nullptr) floor_name += "_x";

    LpModel sab = apply_edit(
        model, ModelEdit::add_constraint({cap_name, {{v.name, 1.0}}, Sense::LE, star}));
    sab = apply_edit(
        sab, ModelEdit::add_constraint({floor_name, {{v.name, 1.0}}, Sense::GE, star + 1.0}));
    const auto iis = infeasible_iis(sab);
    if (!iis || !iis->contains(floor_name)) return std::nullopt;  // cannot happen
    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {floor_name};
    inj.gt.fix = {ModelEdit::drop(floor_name)};
    inj.gt.iis_gt = *iis;
    inj.gt.original_objective = *base.objective;
    return inj;
  }
}

// ---- Type D: raise a single-variable >= row above the implied maximum --

std::optional<Injection> inject_lower_bound_conflict(const LpModel& model,
                                                     const SolveResult& base,
                                                     const SabotageConfig& cfg) {
  int tried = 0;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::GE || c.terms.size() != 1) continue;
    const auto& [var, coeff] = *c.terms.begin();
    if (coeff <= 0.0) continue;
    if (++tried > cfg.num_candidates) break;

    LpModel probe = model;
    probe.objective_sense = ObjSense::MAX;
    for (Variable& v : probe.variables) v.obj_coeff = v.name == var ? 1.0 : 0.0;
    const SolveResult r = solve(probe);
    if (r.status != SolveStatus::OPTIMAL) continue;  // no implied maximum

    const double max_activity = coeff * *r.objective;
    const double gap = std::max(1.0, 0.1 * std::max(1.0, std::fabs(max_activity)));
    const double new_rhs = max_activity + gap;

    LpModel sab = apply_edit(model, ModelEdit::set_rhs(c.name, new_rhs));
    const auto iis = infeasible_iis(sab);
    if (!iis || !iis->contains(c.name)) continue;
    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {c.name};
    inj.gt.fix = {ModelEdit::relax(c.name, c.rhs - new_rhs)};
    inj.gt.iis_gt = *iis;
    inj.gt.original_objective = *base.objective;
    return inj;
  }
  return std::nullopt;
}

// ---- Type E: scale the largest demand by alpha ------------------------

std::optional<Injection> inject_over_allocation(const LpModel& model,
                                                const SolveResult& base,
                                                const SabotageConfig& cfg, Rng& rng) {
  const Constraint* top = nullptr;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::GE || c.rhs <= 0.0) continue;
    if (top == nullptr || c.rhs > top->rhs) top = &c;
  }
  if (top == nullptr) return std::nullopt;

  for (int attempt = 0; attempt < cfg.num_candidates; ++attempt) {
    const double alpha = cfg.randomize_alpha ? rng.uniform(1.2, 1.5) : cfg.alpha;
    const double new_rhs = alpha * top->rhs;
    LpModel sab = apply_edit(model, ModelEdit::set_rhs(top->name, new_rhs));
    const auto iis = infeasible_iis(sab);
    if (iis && iis->contains(top->name)) {
      Injection inj;
      inj.sabotaged = std::move(sab);
      inj.gt.key_constraints = {top->name};
      inj.gt.fix = {ModelEdit::relax(top->name, top->rhs - new_rhs)};
      inj.gt.iis_gt = *iis;
      inj.gt.original_objective = *base.objective;
      return inj;
    }
    if (!cfg.randomize_alpha) break;  // identical retries are pointless
  }
  return std::nullopt;
}

// ---- Type F: tighten a variable bound feeding a wide demand row --------

constexpr double kCapacityCutFactors[] = {0.5, 0.3, 0.15, 0.05};

// True when the row is a structural capacity-cut target: GE over 4..6
// positive unit-ish terms, every variable finitely bounded above.
bool capacity_cut_shape(const LpModel& model, const Constraint& c) {
  if (c.sense != Sense::GE || c.terms.size() < 4 || c.terms.size() > 6) return false;
  if (!all_positive_terms(c)) return false;
  for (const auto& [var, coeff] : c.terms) {
    const Variable* v = model.find_variable(var);
    if (v == nullptr || !std::isfinite(v->upper)) return false;
  }
  return true;
}

// True when some admissible factor cut of some variable makes the row alone
// unattainable within bounds: f*ub_v < rhs - sum of the other uppers. Rows
// that can never cross (e.g. unit-box covering rows, where removing one
// variable still leaves width-1 >= rhs) would burn injection attempts for
// nothing, so both the precheck and the injector skip them up front.
bool capacity_cut_crossing(const LpModel& model, const Constraint& c) {
  double ub_sum = 0.0;
  for (const auto& [var, coeff] : c.terms) {
    ub_sum += model.find_variable(var)->upper * coeff;
  }
  for (const auto& [var, coeff] : c.terms) {
    const Variable* v = model.find_variable(var);
    const double needed = c.rhs - (ub_sum - v->upper * coeff);
    if (needed <= 0.0) continue;
    for (double f : kCapacityCutFactors) {
      const double new_ub = f * v->upper;
      if (new_ub < v->lower) break;
      if (new_ub * coeff < needed) return true;
    }
  }
  return false;
}

std::optional<Injection> inject_capacity_violation(const LpModel& model,
                                                   const SolveResult& base,
                                                   const SabotageConfig& cfg) {
  int tried = 0;
  for (const Constraint& c : model.constraints) {
    if (!capacity_cut_shape(model, c)) continue;
    if (!capacity_cut_crossing(model, c)) continue;
    if (++tried > cfg.num_candidates) break;

    // Try the biggest-bound variable first: cutting it removes the most
    // attainable activity from the symptom row.
    std::vector<std::string> order;
    for (const auto& [var, coeff] : c.terms) order.push_back(var);
    std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
      return model.find_variable(a)->upper > model.find_variable(b)->upper;
    });

    for (const std::string& var : order) {
      const Variable* v = model.find_variable(var);
      for (double f : kCapacityCutFactors) {
        const double new_ub = f * v->upper;
        if (new_ub < v->lower) break;
        LpModel sab = apply_edit(model, ModelEdit::set_bound(var, false, new_ub));
        const auto iis = infeasible_iis(sab);
        if (!iis) continue;                      // still feasible: tighten more
        if (!iis->contains(c.name)) break;       // conflict surfaced elsewhere
        Injection inj;
        inj.sabotaged = std::move(sab);
        inj.gt.key_constraints = {c.name};  // the symptom the agent sees
        inj.gt.fix = {ModelEdit::relax(bound_constraint_name(var, false), v->upper - new_ub)};
        inj.gt.iis_gt = *iis;
        inj.gt.original_objective = *base.objective;
        inj.root_cause = bound_constraint_name(var, false);
        return inj;
      }
    }
  }
  return std::nullopt;
}

// ---- Type G: corrupted flow balance masking a raised demand ------------

std::optional<Injection> inject_flow_imbalance(const LpModel& model,
                                               const SolveResult& base,
                                               const SabotageConfig& cfg) {
  (void)cfg;
  const Constraint* balance = nullptr;
  for (const Constraint& c : model.constraints) {
    if (c.sense == Sense::EQ) {
      balance = &c;
      break;
    }
  }
  if (balance == nullptr) return std::nullopt;

  double cap_sum = 0.0;
  int caps = 0;
  for (const Constraint& c : model.constraints) {
    if (c.sense == Sense::LE && c.terms.size() == 1) {
      cap_sum += c.rhs;
      ++caps;
    }
  }
  const Constraint* demand = nullptr;
  double dem_sum = 0.0;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::GE || c.terms.size() != 1 || c.rhs <= 0.0) continue;
    dem_sum += c.rhs;
    if (demand == nullptr || c.rhs > demand->rhs) demand = &c;
  }
  if (caps == 0 || demand == nullptr) return std::nullopt;

  const double gap = std::max(1.0, 0.1 * cap_sum);
  const double headroom = cap_sum - dem_sum;
  if (headroom < 0.0) return std::nullopt;
  const double raise = headroom + gap;

  // The balance corruption must exceed what either flow direction can carry.
  for (const double delta : {cap_sum + gap, -(cap_sum + gap)}) {
    LpModel sab = apply_edit(model, ModelEdit::set_rhs(balance->name, balance->rhs + delta));
    sab = apply_edit(sab, ModelEdit::set_rhs(demand->name, demand->rhs + raise));

    const auto iis0 = infeasible_iis(sab);
    if (!iis0 || !iis0->contains(balance->name) || iis0->contains(demand->name)) {
      continue;  // wrong orientation or the mask did not hold
    }
    // Fixing the balance alone must expose the second conflict.
    const ModelEdit primary_fix = ModelEdit::relax(balance->name, -delta);
    LpModel after_primary = apply_edit(sab, primary_fix);
    const auto iis1 = infeasible_iis(after_primary);
    if (!iis1 || !iis1->contains(demand->name)) continue;
    const ModelEdit cascade_fix = ModelEdit::relax(demand->name, -raise);
    const SolveResult repaired = solve(apply_edit(after_primary, cascade_fix));
    if (repaired.status != SolveStatus::OPTIMAL) continue;

    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {balance->name};
    inj.gt.fix = {primary_fix};
    inj.gt.iis_gt = *iis0;
    inj.gt.original_objective = *base.objective;
    GroundTruth cascade;
    cascade.key_constraints = {demand->name};
    cascade.fix = {cascade_fix};
    cascade.iis_gt = *iis1;
    cascade.original_objective = *base.objective;
    inj.cascade = std::move(cascade);
    return inj;
  }
  return std::nullopt;
}

// ---- Type H: requirement exceeding the sum of variable bounds ----------

std::optional<Injection> inject_multi_conflict(const LpModel& model,
                                               const SolveResult& base, Rng& rng) {
  std::vector<int> finite;
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    if (std::isfinite(model.variables[i].upper)) finite.push_back(static_cast<int>(i));
  }
  if (finite.size() < 7) return std::nullopt;

  const std::size_t want = 7 + rng.index(5);  // 7..11 variables
  rng.shuffle(finite);
  finite.resize(std::min(want, finite.size()));
  std::sort(finite.begin(), finite.end());

  double ub_sum = 0.0;
  Constraint req{"extra_req", {}, Sense::GE, 0.0};
  for (int i : finite) {
    req.terms[model.variables[static_cast<std::size_t>(i)].name] = 1.0;
    ub_sum += model.variables[static_cast<std::size_t>(i)].upper;
  }
  req.rhs = 1.15 * ub_sum + 1.0;
  while (model.find_constraint(req.name) != nullptr) req.name += "_x";

  LpModel sab = apply_edit(model, ModelEdit::add_constraint(req));
  const auto iis = infeasible_iis(sab);
  if (!iis || !iis->contains(req.name)) return std::nullopt;
  Injection inj;
  inj.sabotaged = std::move(sab);
  inj.gt.key_constraints = {req.name};
  inj.gt.fix = {ModelEdit::drop(req.name)};
  inj.gt.iis_gt = *iis;
  inj.gt.original_objective = *base.objective;
  return inj;
}

// ---- Type I: flipped wide row + lower bounds raised to the optimum -----

std::optional<Injection> inject_composite(const LpModel& model, const SolveResult& base,
                                          const SabotageConfig& cfg) {
  std::vector<const Constraint*> cands;
  for (const Constraint& c : model.constraints) {
    if (c.sense != Sense::GE || c.terms.size() < 7 || !all_positive_terms(c)) continue;
    if (base.slacks.at(c.name) < 1.0) continue;  // need a real conflict gap
    cands.push_back(&c);
  }
  std::stable_sort(cands.begin(), cands.end(), [&](const Constraint* a, const Constraint* b) {
    return base.slacks.at(a->name) > base.slacks.at(b->name);
  });
  if (static_cast<int>(cands.size()) > cfg.num_candidates) {
    cands.resize(static_cast<std::size_t>(cfg.num_candidates));
  }

  for (const Constraint* c : cands) {
    LpModel sab = apply_edit(model, ModelEdit::flip_sense(c->name));
    for (const auto& [var, coeff] : c->terms) {
      const Variable* v = model.find_variable(var);
      const double star = std::min(base.primal.at(var), v->upper);
      if (star > v->lower) {
        sab = apply_edit(sab, ModelEdit::set_bound(var, true, star));
      }
    }
    const auto iis = infeasible_iis(sab);
    if (!iis || !iis->contains(c->name)) continue;

    // The labeled fix flips the row back, preserving the objective exactly;
    // at least one other single-edit repair must also restore feasibility.
    const SolveResult fixed = solve(apply_edit(sab, ModelEdit::flip_sense(c->name)));
    if (fixed.status != SolveStatus::OPTIMAL) continue;
    if (std::fabs(*fixed.objective - *base.objective) >
        kObjTol * (1.0 + std::fabs(*base.objective))) {
      continue;
    }
    const SolveResult alt = solve(apply_edit(sab, ModelEdit::drop(c->name)));
    if (alt.status == SolveStatus::INFEASIBLE) continue;

    Injection inj;
    inj.sabotaged = std::move(sab);
    inj.gt.key_constraints = {c->name};
    inj.gt.fix = {ModelEdit::flip_sense(c->name)};
    inj.gt.iis_gt = *iis;
    inj.gt.original_objective = *base.objective;
    return inj;
  }
  return std::nullopt;
}

}  // namespace

bool precheck(const LpModel& model, char error_type) {
  const auto count_if = [&](auto pred) {
    return std::count_if(model.constraints.begin(), model.constraints.end(), pred);
  };
  switch (error_type) {
    case 'A':
      return count_if([](const Constraint& c) { return c.sense != Sense::EQ; }) >= 2;
    case 'B':
      return count_if([](const Constraint& c) {
               return c.sense == Sense::LE && c.terms.size() >= 2;
             }) >= 1;
    case 'C':
      return !model.variables.empty();
    case 'D':
      return count_if([](const Constraint& c) {
               return c.sense == Sense::GE && c.terms.size() == 1 &&
                      c.terms.begin()->second > 0.0;
             }) >= 1;
    case 'E':
    case 'G':
      return count_if([](const Constraint& c) { return c.sense == Sense::EQ; }) >= 1 &&
             count_if([](const Constraint& c) {
               return c.sense == Sense::LE && c.terms.size() == 1;
             }) >= 1 &&
             count_if([](const Constraint& c) {
               return c.sense == Sense::GE && c.terms.size() == 1 && c.rhs > 0.0;
             }) >= 2;
    case 'F':
      return std::any_of(model.constraints.begin(), model.constraints.end(),
                         [&](const Constraint& c) {
                           return capacity_cut_shape(model, c) &&
                                  capacity_cut_crossing(model, c);
                         });
    case 'H': {
      int finite = 0;
      for (const Variable& v : model.variables) {
        if (std::isfinite(v.upper)) ++finite;
      }
      return finite >= 7;
    }
    case 'I':
      return std::any_of(model.constraints.begin(), model.constraints.end(),
                         [](const Constraint& c) {
                           return c.sense == Sense::GE && c.terms.size() >= 7 &&
                                  all_positive_terms(c);
                         });
    default:
      throw InvalidModelError(std::string("unknown error type code: ") + error_type);
  }
}

std::optional<Injection> inject(const LpModel& model, char error_type,
                                const SabotageConfig& cfg, Rng& rng) {
  cfg.check();
  error_type_info(error_type);
  const SolveResult base = solve(model);
  if (base.status != SolveStatus::OPTIMAL) {
    throw InvalidModelError("seed model must solve OPTIMAL before sabotage");
  }
  switch (error_type) {
    case 'A': return inject_flip(model, base, cfg);
    case 'B': return inject_rhs_shrink(model, base, cfg);
    case 'C': return inject_upper_bound_conflict(model, base, cfg);
    case 'D': return inject_lower_bound_conflict(model, base, cfg);
    case 'E': return inject_over_allocation(model, base, cfg, rng);
    case 'F': return inject_capacity_violation(model, base, cfg);
    case 'G': return inject_flow_imbalance(model, base, cfg);
    case 'H': return inject_multi_conflict(model, base, rng);
    case 'I': return inject_composite(model, base, cfg);
    default: return std::nullopt;
  }
}

ValidationReport validate(const BenchmarkInstance& inst, const SolverConfig& scfg) {
  ValidationReport rep;
  // Phase 1: the pristine model must be solvable.
  if (solve(inst.original, scfg).status != SolveStatus::OPTIMAL) {
    rep.failed_phase = 1;
    rep.detail = "original model is not OPTIMAL";
    return rep;
  }
  // Phase 2: the sabotaged model must be broken.
  if (solve(inst.sabotaged, scfg).status != SolveStatus::INFEASIBLE) {
    rep.failed_phase = 2;
    rep.detail = "sabotaged model is not INFEASIBLE";
    return rep;
  }
  // Phase 3: conflict isolation must implicate the labeled repair.
  IisReport iis;
  try {
    iis = compute_iis(inst.sabotaged, scfg);
  } catch (const Error& e) {
    rep.failed_phase = 3;
    rep.detail = e.what();
    return rep;
  }
  if (iis.members.empty() || iis.members != inst.ground_truth.iis_gt.members) {
    rep.failed_phase = 3;
    rep.detail = "recomputed conflict does not match the stored one";
    return rep;
  }
  const std::string anchor =
      inst.error_type == 'F'
          ? (inst.ground_truth.key_constraints.empty()
                 ? std::string()
                 : inst.ground_truth.key_constraints.front())
          : (inst.ground_truth.fix.empty() ? std::string()
                                           : inst.ground_truth.fix.front().target);
  if (anchor.empty() || !iis.contains(anchor)) {
    rep.failed_phase = 3;
    rep.detail = "conflict does not contain the repair anchor '" + anchor + "'";
    return rep;
  }
  // Phase 4: the labeled fix (plus cascade fix when present) restores OPTIMAL.
  try {
    LpModel fixed = inst.sabotaged;
    for (const ModelEdit& e : inst.ground_truth.fix) fixed = apply_edit(fixed, e);
    if (inst.cascade) {
      for (const ModelEdit& e : inst.cascade->fix) fixed = apply_edit(fixed, e);
    }
    if (solve(fixed, scfg).status != SolveStatus::OPTIMAL) {
      rep.failed_phase = 4;
      rep.detail = "ground-truth fix does not restore OPTIMAL";
      return rep;
    }
  } catch (const Error& e) {
    rep.failed_phase = 4;
    rep.detail = e.what();
    return rep;
  }
  rep.pass = true;
  return rep;
}

Difficulty assign_difficulty(const BenchmarkInstance& inst) {
  const int size = inst.ground_truth.iis_gt.size;
  if (size <= 4) return Difficulty::Easy;
  if (size <= 7) return Difficulty::Hard;
  if (size <= 10) {
    return inst.error_type == 'H' || inst.error_type == 'I' ? Difficulty::Expert
                                                            : Difficulty::Hard;
  }
  return Difficulty::Expert;
}

namespace {

std::string sense_suffix(Sense s) {
  switch (s) {
    case Sense::LE: return "ub";
    case Sense::GE: return "lb";
    case Sense::EQ: return "eq";
  }
  return "eq";
}

// Obfuscates constraint names in both models as c_<6 hex>_<sense>, so that
// emitted names carry no hint about which constraint was corrupted.
void rename_instance(BenchmarkInstance& inst, Rng& rng) {
  std::map<std::string, std::string> mapping;
  std::set<std::string> used;
  const auto assign_name = [&](const std::string& old, Sense sense) {
    if (mapping.count(old)) return;
    std::string fresh;
    do {
      fresh = "c_" + rng.hex(6) + "_" + sense_suffix(sense);
    } while (used.count(fresh));
    used.insert(fresh);
    mapping[old] = fresh;
  };
  // Suffix reflects what the agent sees: the sabotaged model's sense.
  for (const Constraint& c : inst.sabotaged.constraints) assign_name(c.name, c.sense);
  for (const Constraint& c : inst.original.constraints) assign_name(c.name, c.sense);

  const auto remap = [&](std::string& name) {
    const auto it = mapping.find(name);
    if (it != mapping.end()) name = it->second;
  };
  for (Constraint& c : inst.original.constraints) remap(c.name);
  for (Constraint& c : inst.sabotaged.constraints) remap(c.name);
  const auto remap_gt = [&](GroundTruth& gt) {
    for (std::string& k : gt.key_constraints) remap(k);
    for (ModelEdit& e : gt.fix) {
      remap(e.target);
      if (e.constraint) remap(e.constraint->name);
    }
    for (std::string& m : gt.iis_gt.members) remap(m);
  };
  remap_gt(inst.ground_truth);
  if (inst.cascade) remap_gt(*inst.cascade);
  if (inst.root_cause) remap(*inst.root_cause);
}

}  // namespace

std::vector<BenchmarkInstance> generate_benchmark(
    const std::vector<LpModel>& pool, const std::map<char, int>& counts,
    const SabotageConfig& cfg) {
  cfg.check();
  if (pool.empty()) throw InvalidModelError("seed pool is empty");
  for (const auto& [code, n] : counts) {
    error_type_info(code);
    if (n < 0) throw InvalidModelError("negative instance count");
  }

  struct Slot {
    char type;
    int index;
  };
  std::vector<Slot> slots;
  for (const auto& [code, n] : counts) {
    for (int i = 0; i < n; ++i) slots.push_back({code, i});
  }

  std::vector<std::optional<BenchmarkInstance>> out(slots.size());
  std::vector<std::string> shortfall(slots.size());

  parallel_for(static_cast<int>(slots.size()), [&](int g) {
    const Slot slot = slots[static_cast<std::size_t>(g)];
    try {
      Rng rng = substream(cfg.rng_seed, "sabotage",
                          static_cast<std::uint64_t>(slot.type),
                          static_cast<std::uint64_t>(slot.index));
      const std::size_t start = rng.index(pool.size());
      int attempts = 0;
      int eligible = 0;
      for (std::size_t off = 0; off < pool.size(); ++off) {
        const LpModel& seed = pool[(start + off) % pool.size()];
        if (!precheck(seed, slot.type)) continue;  // structural skip is free
        ++eligible;
        if (attempts > cfg.max_regenerations) break;
        ++attempts;
        auto inj = inject(seed, slot.type, cfg, rng);
        if (!inj) continue;

        BenchmarkInstance inst;
        inst.id = std::string(1, slot.type) + "_" + rng.hex(6);
        inst.error_type = slot.type;
        inst.original = seed;
        inst.sabotaged = std::move(inj->sabotaged);
        inst.ground_truth = std::move(inj->gt);
        inst.root_cause = std::move(inj->root_cause);
        inst.cascade = std::move(inj->cascade);
        if (slot.type == 'G' || slot.type == 'H' || slot.type == 'I') {
          rename_instance(inst, rng);
        }
        inst.difficulty = assign_difficulty(inst);
        if (!validate(inst).pass) continue;  // counts as a spent attempt
        out[static_cast<std::size_t>(g)] = std::move(inst);
        break;
      }
      if (!out[static_cast<std::size_t>(g)]) {
        shortfall[static_cast<std::size_t>(g)] =
            std::string("type ") + slot.type + " slot " + std::to_string(slot.index) +
            ": exhausted " + std::to_string(attempts) + " attempts over " +
            std::to_string(eligible) + " eligible seed models";
      }
    } catch (const std::exception& e) {
      shortfall[static_cast<std::size_t>(g)] =
          std::string("type ") + slot.type + " slot " + std::to_string(slot.index) +
          ": " + e.what();
    }
  });

  std::string report;
  for (const std::string& s : shortfall) {
    if (!s.empty()) report += (report.empty() ? "" : "; ") + s;
  }
  if (!report.empty()) throw PoolExhaustedError("benchmark shortfall: " + report);

  std::vector<BenchmarkInstance> result;
  result.reserve(out.size());
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

namespace {

void write_ground_truth(JsonWriter& w, const GroundTruth& gt) {
  w.begin_object();
  w.key("key_constraints");
  w.begin_array();
  for (const std::string& k : gt.key_constraints) w.value(k);
  w.end_array();
  w.key("fix");
  w.begin_array();
  for (const ModelEdit& e : gt.fix) write_edit(w, e);
  w.end_array();
  w.key("iis_gt");
  gt.iis_gt.write(w);
  w.key("original_objective");
  w.value(gt.original_objective);
  w.end_object();
}

GroundTruth parse_ground_truth(const Json& j) {
  GroundTruth gt;
  for (const auto& k : j.at("key_constraints")) gt.key_constraints.push_back(k.get<std::string>());
  for (const auto& e : j.at("fix")) gt.fix.push_back(parse_edit(e));
  gt.iis_gt = IisReport::parse(j.at("iis_gt"));
  gt.original_objective = j.at("original_objective").get<double>();
  return gt;
}

}  // namespace

std::string serialize_instance(const BenchmarkInstance& inst) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("id");
  w.value(inst.id);
  w.key("error_type");
  w.value(std::string(1, inst.error_type));
  w.key("difficulty");
  w.value(to_string(inst.difficulty));
  w.key("original");
  write_model(w, inst.original);
  w.key("sabotaged");
  write_model(w, inst.sabotaged);
  w.key("ground_truth");
  write_ground_truth(w, inst.ground_truth);
  w.key("root_cause");
  if (inst.root_cause) w.value(*inst.root_cause);
  else w.value_null();
  w.key("cascade");
  if (inst.cascade) write_ground_truth(w, *inst.cascade);
  else w.value_null();
  w.end_object();
  return w.str();
}

BenchmarkInstance parse_instance(const Json& j) {
  BenchmarkInstance inst;
  inst.id = j.at("id").get<std::string>();
  const std::string code = j.at("error_type").get<std::string>();
  if (code.size() != 1) throw ParseError("error_type must be a single letter");
  inst.error_type = code[0];
  error_type_info(inst.error_type);
  inst.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  inst.original = parse_model(j.at("original"));
  inst.sabotaged = parse_model(j.at("sabotaged"));
  inst.ground_truth = parse_ground_truth(j.at("ground_truth"));
  if (j.contains("root_cause") && !j.at("root_cause").is_null()) {
    inst.root_cause = j.at("root_cause").get<std::string>();
  }
  if (j.contains("cascade") && !j.at("cascade").is_null()) {
    inst.cascade = parse_ground_truth(j.at("cascade"));
  }
  return inst;
}

BenchmarkInstance parse_instance_text(const std::string& line) {
  return parse_instance(parse_json(line, "benchmark instance"));
}

void write_benchmark_file(const std::string& path,
                          const std::vector<BenchmarkInstance>& instances) {
  std::string out;
  for (const BenchmarkInstance& inst : instances) {
    out += serialize_instance(inst);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<BenchmarkInstance> read_benchmark_file(const std::string& path) {
  std::vector<BenchmarkInstance> out;
  for (const std::string& line : read_lines(path)) {
    out.push_back(parse_instance_text(line));
  }
  return out;
}

}  // namespace orgym
