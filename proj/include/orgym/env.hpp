// Iterative debugging environment: a single-episode MDP over one sabotaged
// benchmark instance. The agent observes an eight-component state (problem
// text, current model, solver status, conflict members, optional slack and
// bound diagnostics, action history, repair-step counter), issues diagnostic
// or repair actions, and receives a composite reward per step.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orgym/iis.hpp"
#include "orgym/model.hpp"
#include "orgym/rng.hpp"
#include "orgym/saboteur.hpp"
#include "orgym/solver.hpp"

namespace orgym {

enum class ActionKind {
  GET_IIS,      // diagnostic: refresh the conflict member list
  CHECK_SLACK,  // diagnostic: populate per-constraint signed slacks
  CHECK_BOUND,  // diagnostic: populate per-variable bound status
  RELAX,        // repair: rhs of `target` += delta (bound names allowed)
  DROP,         // repair: remove `target` (bound names: relax to +-inf)
  REWRITE,      // repair: replace constraint `target` with `rewrite` payload
  SUBMIT,       // re-solve and finish the episode
  RESTART,      // restore the sabotaged model; costs one repair step
};

std::string_view to_string(ActionKind k);
ActionKind action_kind_from_string(std::string_view s);

// Diagnostics are free (no step cost) by default; repairs modify the model.
bool is_diagnostic(ActionKind k);
bool is_repair(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::GET_IIS;
  std::string target;                    // RELAX / DROP / REWRITE
  double delta = 0.0;                    // RELAX
  std::optional<Constraint> rewrite;     // REWRITE replacement row
  // A diagnosis set may ride on any action; it is scored against the
  // ground-truth conflict and unioned over the episode for DA.
  std::optional<std::vector<std::string>> diagnosis;

  static Action get_iis();
  static Action check_slack();
  static Action check_bound();
  static Action relax(std::string target, double delta);
  static Action drop(std::string target);
  static Action rewrite_row(std::string target, Constraint replacement);
  static Action submit();
  static Action restart();
};

void write_action(JsonWriter& w, const Action& a);
Action parse_action(const Json& j);

struct EpisodeState {
  std::string problem_nl;
  LpModel code;
  SolveStatus status = SolveStatus::INFEASIBLE;
  // Current conflict members (constraint and bound pseudo-row names); fresh
  // after reset and after every repair that leaves the model INFEASIBLE.
  std::vector<std::string> iis_log;
  // Populated only after CHECK_SLACK / CHECK_BOUND; refreshed on later solves.
  std::optional<std::map<std::string, double>> slack_values;
  std::optional<std::map<std::string, std::string>> bound_status;
  std::vector<Action> history;
  int step = 0;  // repair-step counter (diagnostics are free by default)
};

void write_state(JsonWriter& w, const EpisodeState& s);
std::string serialize_state(const EpisodeState& s);
// 16-hex-char content digest of the serialized state (trajectory logs).
std::string state_digest(const EpisodeState& s);

struct RewardBreakdown {
  double outcome_raw = 0.0;     // +100 OPTIMAL, -50 INFEASIBLE, 0 otherwise
  double diagnosis_raw = 0.0;   // 100 * |diagnosis ∩ conflict_gt| / |conflict_gt|
  double efficiency_raw = 0.0;  // 50 * max(0, (max_steps - step)/max_steps)
  double outcome = 0.0;         // 0.5 * outcome_raw
  double diagnosis = 0.0;       // 0.3 * diagnosis_raw
  double efficiency = 0.0;      // 0.2 * efficiency_raw
  double faithfulness_penalty = 0.0;  // 20 when a repair targets outside the IIS
  double total = 0.0;  // outcome + diagnosis + efficiency - faithfulness_penalty
};

void write_reward(JsonWriter& w, const RewardBreakdown& r);
RewardBreakdown parse_reward(const Json& j);

struct EnvConfig {
  int max_steps = 50;
  double per_solve_timeout = 10.0;  // seconds, applied to every solver call
  bool diagnostic_actions_free = true;

  void check() const;
};

// Composite per-step reward. `before`/`after` are the states around one
// action; the efficiency term uses the pre-action step counter. The
// faithfulness penalty checks the repair target against the post-repair
// conflict when one exists, else the pre-repair conflict (a successful
// repair leaves no conflict to test against).
RewardBreakdown compute_reward(const EpisodeState& before, const Action& a,
                               const EpisodeState& after, const GroundTruth& gt,
                               int max_steps = 50);

enum class Outcome { FullSuccess, PartialSuccess, Failure };
std::string_view to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

// OP = 1 - |obj_final - obj_orig| / |obj_orig|.
double optimality_preservation(double obj_final, double obj_orig);
// FullSuccess: OPTIMAL and OP > 0.95; PartialSuccess: OPTIMAL and
// 0.8 < OP <= 0.95; everything else is Failure.
Outcome classify_outcome(SolveStatus final_status, std::optional<double> final_objective,
                         double original_objective);

// One episode over one instance. Single-threaded; run many in parallel by
// giving each its own DebugEnv.
class DebugEnv {
 public:
  explicit DebugEnv(BenchmarkInstance inst, EnvConfig cfg = {});

  // Returns to the initial state: sabotaged model, INFEASIBLE, fresh
  // conflict, step 0, empty history. Throws OracleDisagreementError when the
  // sabotaged model does not solve INFEASIBLE (corrupt instance).
  void reset();

  struct StepResult {
    RewardBreakdown reward;
    bool done = false;
  };
  // Applies one action. Diagnostic kinds populate state fields without
  // changing code or step (when diagnostic_actions_free); repair kinds apply
  // the edit, re-solve, and refresh the conflict, costing one step; SUBMIT
  // re-solves and ends the episode without costing a step; RESTART restores
  // the sabotaged model for one step. An invalid repair (unknown target /
  // inapplicable edit) leaves the state unchanged and is penalized through
  // the faithfulness rule. Episodes also end when the step counter reaches
  // max_steps or the total action count reaches 4 * max_steps
  // (diagnostic-loop guard).
  StepResult step(const Action& a);

  const EpisodeState& state() const { return state_; }
  bool done() const { return done_; }
  int action_count() const { return action_count_; }
  const BenchmarkInstance& instance() const { return inst_; }
  const EnvConfig& config() const { return cfg_; }
  // Objective of the most recent solve when it was OPTIMAL.
  std::optional<double> final_objective() const;

 private:
  void resolve();        // solve current code, refresh status/conflict/views
  void refresh_views();  // re-derive engaged slack/bound views from last solve

  BenchmarkInstance inst_;
  EnvConfig cfg_;
  SolverConfig solver_cfg_;
  EpisodeState state_;
  SolveResult last_;
  bool done_ = false;
  int action_count_ = 0;
};

// Lightweight stochastic transition model used to test agent logic without a
// solver in the loop: repairs on a key constraint succeed with probability
// 0.9 (RELAX) / 0.7 (DROP); repairs on a non-key conflict member shrink the
// conflict by one with probability 0.5; everything else leaves the state
// INFEASIBLE and unchanged. Diagnostics return the state untouched.
EpisodeState simulate_step(const Action& a, const EpisodeState& s,
                           const GroundTruth& gt, Rng& rng);

}  // namespace orgym
