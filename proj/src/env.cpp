#include "orgym/env.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "orgym/errors.hpp"

namespace orgym {

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::GET_IIS: return "GET_IIS";
    case ActionKind::CHECK_SLACK: return "CHECK_SLACK";
    case ActionKind::CHECK_BOUND: return "CHECK_BOUND";
    case ActionKind::RELAX: return "RELAX";
    case ActionKind::DROP: return "DROP";
    case ActionKind::REWRITE: return "REWRITE";
    case ActionKind::SUBMIT: return "SUBMIT";
    case ActionKind::RESTART: return "RESTART";
  }
  return "GET_IIS";
}

ActionKind action_kind_from_string(std::string_view s) {
  if (s == "GET_IIS") return ActionKind::GET_IIS;
  if (s == "CHECK_SLACK") return ActionKind::CHECK_SLACK;
  if (s == "CHECK_BOUND") return ActionKind::CHECK_BOUND;
  if (s == "RELAX") return ActionKind::RELAX;
  if (s == "DROP") return ActionKind::DROP;
  if (s == "REWRITE") return ActionKind::REWRITE;
  if (s == "SUBMIT") return ActionKind::SUBMIT;
  if (s == "RESTART") return ActionKind::RESTART;
  throw ParseError("unknown action kind: " + std::string(s));
}

bool is_diagnostic(ActionKind k) {
  return k == ActionKind::GET_IIS || k == ActionKind::CHECK_SLACK ||
         k == ActionKind::CHECK_BOUND;
}

bool is_repair(ActionKind k) {
  return k == ActionKind::RELAX || k == ActionKind::DROP || k == ActionKind::REWRITE;
}

Action Action::get_iis() { return {}; }

Action Action::check_slack() {
  Action a;
  a.kind = ActionKind::CHECK_SLACK;
  return a;
}

Action Action::check_bound() {
  Action a;
  a.kind = ActionKind::CHECK_BOUND;
  return a;
}

Action Action::relax(std::string target, double delta) {
  Action a;
  a.kind = ActionKind::RELAX;
  a.target = std::move(target);
  a.delta = delta;
  return a;
}

Action Action::drop(std::string target) {
  Action a;
  a.kind = ActionKind::DROP;
  a.target = std::move(target);
  return a;
}

Action Action::rewrite_row(std::string target, Constraint replacement) {
  Action a;
  a.kind = ActionKind::REWRITE;
  a.target = std::move(target);
  a.rewrite = std::move(replacement);
  return a;
}

Action Action::submit() {
  Action a;
  a.kind = ActionKind::SUBMIT;
  return a;
}

Action Action::restart() {
  Action a;
  a.kind = ActionKind::RESTART;
  return a;
}

namespace {

void write_constraint_payload(JsonWriter& w, const Constraint& c) {
  w.begin_object();
  w.key("name");
  w.value(c.name);
  w.key("terms");
  w.begin_object();
  for (const auto& [var, coeff] : c.terms) {
    w.key(var);
    w.value(coeff);
  }
  w.end_object();
  w.key("sense");
  w.value(to_string(c.sense));
  w.key("rhs");
  w.value(c.rhs);
  w.end_object();
}

Constraint parse_constraint_payload(const Json& j) {
  Constraint c;
  c.name = j.at("name").get<std::string>();
  for (const auto& [var, coeff] : j.at("terms").items()) {
    c.terms[var] = coeff.get<double>();
  }
  c.sense = sense_from_string(j.at("sense").get<std::string>());
  c.rhs = j.at("rhs").get<double>();
  return c;
}

}  // namespace

void write_action(JsonWriter& w, const Action& a) {
  w.begin_object();
  w.key("kind");
  w.value(to_string(a.kind));
  if (a.kind == ActionKind::RELAX || a.kind == ActionKind::DROP ||
      a.kind == ActionKind::REWRITE) {
    w.key("target");
    w.value(a.target);
  }
  if (a.kind == ActionKind::RELAX) {
    w.key("delta");
    w.value(a.delta);
  }
  if (a.kind == ActionKind::REWRITE && a.rewrite) {
    w.key("constraint");
    write_constraint_payload(w, *a.rewrite);
  }
  if (a.diagnosis) {
    w.key("diagnosis");
    w.begin_array();
    for (const std::string& d : *a.diagnosis) w.value(d);
    w.end_array();
  }
  w.end_object();
}

Action parse_action(const Json& j) {
  Action a;
  a.kind = action_kind_from_string(j.at("kind").get<std::string>());
  if (is_repair(a.kind)) {
    a.target = j.at("target").get<std::string>();
    if (a.target.empty()) throw ParseError("repair action with empty target");
  }
  if (a.kind == ActionKind::RELAX) a.delta = j.at("delta").get<double>();
  if (a.kind == ActionKind::REWRITE) {
    a.rewrite = parse_constraint_payload(j.at("constraint"));
  }
  if (j.contains("diagnosis") && !j.at("diagnosis").is_null()) {
    std::vector<std::string> d;
    for (const auto& x : j.at("diagnosis")) d.push_back(x.get<std::string>());
    a.diagnosis = std::move(d);
  }
  return a;
}

void write_state(JsonWriter& w, const EpisodeState& s) {
  w.begin_object();
  w.key("problem_nl");
  w.value(s.problem_nl);
  w.key("code");
  write_model(w, s.code);
  w.key("status");
  w.value(to_string(s.status));
  w.key("iis_log");
  w.begin_array();
  for (const std::string& m : s.iis_log) w.value(m);
  w.end_array();
  w.key("slack_values");
  if (s.slack_values) {
    w.begin_object();
    for (const auto& [name, v] : *s.slack_values) {
      w.key(name);
      w.value(v);
    }
    w.end_object();
  } else {
    w.value_null();
  }
  w.key("bound_status");
  if (s.bound_status) {
    w.begin_object();
    for (const auto& [name, v] : *s.bound_status) {
      w.key(name);
      w.value(v);
    }
    w.end_object();
  } else {
    w.value_null();
  }
  w.key("history");
  w.begin_array();
  for (const Action& a : s.history) write_action(w, a);
  w.end_array();
  w.key("step");
  w.value(s.step);
  w.end_object();
}

std::string serialize_state(const EpisodeState& s) {
  JsonWriter w;
  write_state(w, s);
  return w.str();
}

std::string state_digest(const EpisodeState& s) { return digest_hex(serialize_state(s)); }

void write_reward(JsonWriter& w, const RewardBreakdown& r) {
  w.begin_object();
  w.key("outcome_raw");
  w.value(r.outcome_raw);
  w.key("diagnosis_raw");
  w.value(r.diagnosis_raw);
  w.key("efficiency_raw");
  w.value(r.efficiency_raw);
  w.key("outcome");
  w.value(r.outcome);
  w.key("diagnosis");
  w.value(r.diagnosis);
  w.key("efficiency");
  w.value(r.efficiency);
  w.key("faithfulness_penalty");
  w.value(r.faithfulness_penalty);
  w.key("total");
  w.value(r.total);
  w.end_object();
}

RewardBreakdown parse_reward(const Json& j) {
  RewardBreakdown r;
  r.outcome_raw = j.at("outcome_raw").get<double>();
  r.diagnosis_raw = j.at("diagnosis_raw").get<double>();
  r.efficiency_raw = j.at("efficiency_raw").get<double>();
  r.outcome = j.at("outcome").get<double>();
  r.diagnosis = j.at("diagnosis").get<double>();
  r.efficiency = j.at("efficiency").get<double>();
  r.faithfulness_penalty = j.at("faithfulness_penalty").get<double>();
  r.total = j.at("total").get<double>();
  return r;
}

void EnvConfig::check() const {
  if (max_steps < 1) throw InvalidModelError("max_steps must be >= 1");
  if (!(per_solve_timeout > 0)) throw InvalidModelError("per_solve_timeout must be > 0");
}

RewardBreakdown compute_reward(const EpisodeState& before, const Action& a,
                               const EpisodeState& after, const GroundTruth& gt,
                               int max_steps) {
  RewardBreakdown r;
  switch (after.status) {
    case SolveStatus::OPTIMAL: r.outcome_raw = 100.0; break;
    case SolveStatus::INFEASIBLE: r.outcome_raw = -50.0; break;
    default: r.outcome_raw = 0.0; break;
  }
  if (a.diagnosis && gt.iis_gt.size > 0) {
    const std::set<std::string> unique(a.diagnosis->begin(), a.diagnosis->end());
    int hits = 0;
    for (const std::string& d : unique) hits += gt.iis_gt.contains(d);
    r.diagnosis_raw = 100.0 * hits / gt.iis_gt.size;
  }
  r.efficiency_raw =
      50.0 * std::max(0.0, static_cast<double>(max_steps - before.step) / max_steps);
  if (is_repair(a.kind)) {
    // A successful repair leaves no conflict, so the check falls back to the
    // pre-repair one; an invalid repair leaves the state unchanged and the
    // unknown target necessarily fails the membership test.
    const std::vector<std::string>& iis =
        after.status == SolveStatus::INFEASIBLE ? after.iis_log : before.iis_log;
    if (std::find(iis.begin(), iis.end(), a.target) == iis.end()) {
      r.faithfulness_penalty = 20.0;
    }
  }
  r.outcome = 0.5 * r.outcome_raw;
  r.diagnosis = 0.3 * r.diagnosis_raw;
  r.efficiency = 0.2 * r.efficiency_raw;
  r.total = r.outcome + r.diagnosis + r.efficiency - r.faithfulness_penalty;
  return r;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::FullSuccess: return "full_success";
    case Outcome::PartialSuccess: return "partial_success";
    case Outcome::Failure: return "failure";
  }
  return "failure";
}

Outcome outcome_from_string(std::string_view s) {
  if (s == "full_success") return Outcome::FullSuccess;
  if (s == "partial_success") return Outcome::PartialSuccess;
  if (s == "failure") return Outcome::Failure;
  throw ParseError("unknown outcome: " + std::string(s));
}

double optimality_preservation(double obj_final, double obj_orig) {
  const double denom = std::max(std::fabs(obj_orig), 1e-12);
  return 1.0 - std::fabs(obj_final - obj_orig) / denom;
}

Outcome classify_outcome(SolveStatus final_status, std::optional<double> final_objective,
                         double original_objective) {
  if (final_status != SolveStatus::OPTIMAL || !final_objective) return Outcome::Failure;
  const double op = optimality_preservation(*final_objective, original_objective);
  if (op > 0.95) return Outcome::FullSuccess;
  if (op > 0.8) return Outcome::PartialSuccess;
  return Outcome::Failure;
}

DebugEnv::DebugEnv(BenchmarkInstance inst, EnvConfig cfg)
    : inst_(std::move(inst)), cfg_(cfg) {
  cfg_.check();
  solver_cfg_.timeout_seconds = cfg_.per_solve_timeout;
  reset();
}

void DebugEnv::reset() {
  state_ = EpisodeState{};
  state_.problem_nl = inst_.sabotaged.description;
  state_.code = inst_.sabotaged;
  done_ = false;
  action_count_ = 0;
  resolve();
  if (state_.status != SolveStatus::INFEASIBLE) {
    throw OracleDisagreementError("instance '" + inst_.id +
                                  "': sabotaged model is not INFEASIBLE");
  }
}

void DebugEnv::resolve() {
  last_ = solve(state_.code, solver_cfg_);
  state_.status = last_.status;
  if (state_.status == SolveStatus::INFEASIBLE) {
    state_.iis_log = compute_iis(state_.code, solver_cfg_).members;
  } else {
    state_.iis_log.clear();
  }
  refresh_views();
}

// Diagnostics stay truthful once engaged: re-derive them from the most
// recent solve whenever the state could have changed.
void DebugEnv::refresh_views() {
  if (state_.slack_values) state_.slack_values = last_.slacks;
  if (state_.bound_status) {
    auto& bs = *state_.bound_status;
    bs.clear();
    for (const Variable& v : state_.code.variables) {
      const double x = last_.primal.count(v.name) ? last_.primal.at(v.name) : 0.0;
      const double tol = 1e-7 * (1.0 + std::fabs(x));
      std::string status;
      if (v.lower == v.upper) status = "fixed";
      else if (x < v.lower - tol) status = "below_lower";
      else if (x > v.upper + tol) status = "above_upper";
      else if (x - v.lower <= tol) status = "at_lower";
      else if (v.upper - x <= tol) status = "at_upper";
      else status = "interior";
      bs[v.name] = status;
    }
  }
}

DebugEnv::StepResult DebugEnv::step(const Action& a) {
  if (done_) throw InvalidModelError("episode is already done");
  const EpisodeState before = state_;
  ++action_count_;

  switch (a.kind) {
    case ActionKind::GET_IIS:
    case ActionKind::CHECK_SLACK:
    case ActionKind::CHECK_BOUND: {
      // Diagnostics expose what the last solve already knows; no new solver
      // call, and no code/step change while they are free.
      if (a.kind == ActionKind::CHECK_SLACK) state_.slack_values.emplace();
      if (a.kind == ActionKind::CHECK_BOUND) state_.bound_status.emplace();
      refresh_views();
      if (!cfg_.diagnostic_actions_free) state_.step += 1;
      break;
    }
    case ActionKind::RELAX:
    case ActionKind::DROP:
    case ActionKind::REWRITE: {
      ModelEdit edit;
      if (a.kind == ActionKind::RELAX) {
        edit = ModelEdit::relax(a.target, a.delta);
      } else if (a.kind == ActionKind::DROP) {
        edit = ModelEdit::drop(a.target);
      } else {
        if (!a.rewrite) {
          break;  // malformed repair: state unchanged, penalized via reward
        }
        edit = ModelEdit::rewrite(*a.rewrite);
        edit.target = a.target;
      }
      try {
        LpModel next = apply_edit(state_.code, edit);
        state_.code = std::move(next);
        state_.step += 1;
        resolve();
      } catch (const Error&) {
        // Invalid action: unknown target or inapplicable edit. State (code,
        // status, step) unchanged; the faithfulness penalty applies.
      }
      break;
    }
    case ActionKind::SUBMIT: {
      resolve();
      done_ = true;
      break;
    }
    case ActionKind::RESTART: {
      state_.code = inst_.sabotaged;
      state_.step += 1;
      resolve();
      break;
    }
  }

  state_.history.push_back(a);
  if (state_.step >= cfg_.max_steps) done_ = true;
  if (action_count_ >= 4 * cfg_.max_steps) done_ = true;

  return {compute_reward(before, a, state_, inst_.ground_truth, cfg_.max_steps), done_};
}

std::optional<double> DebugEnv::final_objective() const {
  if (last_.status != SolveStatus::OPTIMAL) return std::nullopt;
  return last_.objective;
}

EpisodeState simulate_step(const Action& a, const EpisodeState& s,
                           const GroundTruth& gt, Rng& rng) {
  if (is_diagnostic(a.kind)) return s;  // info gathering, no change

  EpisodeState next = s;
  if (a.kind == ActionKind::SUBMIT) {
    next.history.push_back(a);
    return next;
  }
  next.step += 1;
  next.history.push_back(a);
  if (a.kind == ActionKind::RESTART) return next;

  const bool key = std::find(gt.key_constraints.begin(), gt.key_constraints.end(),
                             a.target) != gt.key_constraints.end();
  const auto member = std::find(next.iis_log.begin(), next.iis_log.end(), a.target);
  if (a.kind == ActionKind::RELAX && key) {
    if (rng.chance(0.9)) {
      next.status = SolveStatus::OPTIMAL;
      next.iis_log.clear();
    }
  } else if (a.kind == ActionKind::DROP && key) {
    if (rng.chance(0.7)) {
      next.status = SolveStatus::OPTIMAL;
      next.iis_log.clear();
    }
  } else if (!key && member != next.iis_log.end()) {
    if (rng.chance(0.5)) next.iis_log.erase(member);
  }
  return next;
}

}  // namespace orgym
