// Debugging-environment tests: the frozen composite-reward examples, full
// episode walkthroughs over both fixtures, step accounting, termination
// guards, diagnostics, the stochastic transition model, and outcome
// classification boundaries.
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "orgym/env.hpp"
#include "orgym/rng.hpp"
#include "test_util.hpp"

using namespace orgym;
using orgym::testutil::load_fixture;

namespace {

GroundTruth three_member_gt() {
  GroundTruth gt;
  gt.iis_gt.members = {"c1", "c2", "c3"};
  gt.iis_gt.size = 3;
  gt.original_objective = 100.0;
  return gt;
}

EpisodeState infeasible_state(int step, std::vector<std::string> iis) {
  EpisodeState s;
  s.status = SolveStatus::INFEASIBLE;
  s.iis_log = std::move(iis);
  s.step = step;
  return s;
}

}  // namespace

TEST_CASE("frozen reward example: clean repair with full diagnosis") {
  // Repair at step 2 that reaches OPTIMAL, carrying the complete conflict as
  // diagnosis: 0.5*100 + 0.3*100 + 0.2*(50*48/50) = 50 + 30 + 9.6 = 89.6.
  const GroundTruth gt = three_member_gt();
  const EpisodeState before = infeasible_state(2, {"c1", "c2", "c3"});
  EpisodeState after;
  after.status = SolveStatus::OPTIMAL;
  after.step = 3;
  Action a = Action::relax("c3", -10.0);
  a.diagnosis = std::vector<std::string>{"c1", "c2", "c3"};

  const RewardBreakdown r = compute_reward(before, a, after, gt);
  CHECK(r.outcome_raw == doctest::Approx(100.0));
  CHECK(r.diagnosis_raw == doctest::Approx(100.0));
  CHECK(r.efficiency_raw == doctest::Approx(48.0));
  CHECK(r.faithfulness_penalty == doctest::Approx(0.0));
  CHECK(r.total == doctest::Approx(89.6));
}

TEST_CASE("frozen reward example: off-target repair") {
  // Still infeasible after repairing a constraint outside the conflict at
  // step 10: 0.5*(-50) + 0 + 0.2*(50*40/50) - 20 = -25 + 8 - 20 = -37.
  const GroundTruth gt = three_member_gt();
  const EpisodeState before = infeasible_state(10, {"c1"});
  const EpisodeState after = infeasible_state(11, {"c1"});
  const RewardBreakdown r =
      compute_reward(before, Action::relax("harmless", -1.0), after, gt);
  CHECK(r.outcome_raw == doctest::Approx(-50.0));
  CHECK(r.diagnosis_raw == doctest::Approx(0.0));
  CHECK(r.efficiency_raw == doctest::Approx(40.0));
  CHECK(r.faithfulness_penalty == doctest::Approx(20.0));
  CHECK(r.total == doctest::Approx(-37.0));
}

TEST_CASE("frozen reward example: information gathering on a fresh episode") {
  // Diagnostic at step 0 while infeasible: 0.5*(-50) + 0.2*50 = -15, and no
  // faithfulness penalty because nothing was repaired.
  const GroundTruth gt = three_member_gt();
  const EpisodeState before = infeasible_state(0, {"c1", "c2", "c3"});
  const EpisodeState after = before;
  const RewardBreakdown r = compute_reward(before, Action::get_iis(), after, gt);
  CHECK(r.efficiency_raw == doctest::Approx(50.0));
  CHECK(r.faithfulness_penalty == doctest::Approx(0.0));
  CHECK(r.total == doctest::Approx(-15.0));
}

TEST_CASE("reward components always recombine into the total") {
  const GroundTruth gt = three_member_gt();
  for (const double step : {0.0, 10.0, 49.0}) {
    const EpisodeState before = infeasible_state(static_cast<int>(step), {"c1"});
    const EpisodeState after = infeasible_state(static_cast<int>(step) + 1, {"c1"});
    Action a = Action::relax("c1", -1.0);
    a.diagnosis = std::vector<std::string>{"c2"};
    const RewardBreakdown r = compute_reward(before, a, after, gt);
    CHECK(r.outcome == doctest::Approx(0.5 * r.outcome_raw));
    CHECK(r.diagnosis == doctest::Approx(0.3 * r.diagnosis_raw));
    CHECK(r.efficiency == doctest::Approx(0.2 * r.efficiency_raw));
    CHECK(r.total == doctest::Approx(r.outcome + r.diagnosis + r.efficiency -
                                     r.faithfulness_penalty));
  }
}

TEST_CASE("diagnosis scoring deduplicates and partial-credits") {
  const GroundTruth gt = three_member_gt();
  const EpisodeState before = infeasible_state(0, {"c1", "c2", "c3"});
  Action a = Action::get_iis();
  a.diagnosis = std::vector<std::string>{"c1", "c1", "c2", "not_a_member"};
  const RewardBreakdown r = compute_reward(before, a, before, gt);
  CHECK(r.diagnosis_raw == doctest::Approx(100.0 * 2 / 3));
}

TEST_CASE("faithfulness penalty spares on-target repairs") {
  const GroundTruth gt = three_member_gt();
  // Target in the surviving conflict: no penalty even though still infeasible.
  {
    const EpisodeState before = infeasible_state(0, {"c1", "c2"});
    const EpisodeState after = infeasible_state(1, {"c1", "c2"});
    const RewardBreakdown r =
        compute_reward(before, Action::relax("c2", -5.0), after, gt);
    CHECK(r.faithfulness_penalty == doctest::Approx(0.0));
  }
  // Successful repair judged against the pre-repair conflict.
  {
    const EpisodeState before = infeasible_state(0, {"c1", "c2"});
    EpisodeState after;
    after.status = SolveStatus::OPTIMAL;
    after.step = 1;
    const RewardBreakdown r =
        compute_reward(before, Action::relax("c2", -5.0), after, gt);
    CHECK(r.faithfulness_penalty == doctest::Approx(0.0));
  }
}

TEST_CASE("production fixture plays out in one diagnostic and one repair") {
  const BenchmarkInstance inst = load_fixture("production_conflict.json");
  DebugEnv env(inst);

  const EpisodeState& s0 = env.state();
  CHECK(s0.status == SolveStatus::INFEASIBLE);
  CHECK(s0.step == 0);
  CHECK(s0.history.empty());
  CHECK(s0.iis_log == inst.ground_truth.iis_gt.members);
  CHECK(s0.problem_nl == inst.sabotaged.description);
  CHECK_FALSE(s0.slack_values.has_value());

  // Step 1: free diagnostic. Matches the frozen -15 reward example.
  const DebugEnv::StepResult d = env.step(Action::get_iis());
  CHECK_FALSE(d.done);
  CHECK(env.state().step == 0);
  CHECK(d.reward.total == doctest::Approx(-15.0));

  // Step 2: the labeled repair relaxes the inflated quota by 10.
  const DebugEnv::StepResult fix = env.step(Action::relax("c3_min_1", -10.0));
  CHECK_FALSE(fix.done);
  CHECK(env.state().status == SolveStatus::OPTIMAL);
  CHECK(env.state().step == 1);
  CHECK(env.state().iis_log.empty());
  CHECK(fix.reward.outcome_raw == doctest::Approx(100.0));
  CHECK(fix.reward.faithfulness_penalty == doctest::Approx(0.0));

  // Step 3: submit; the step counter stays at one repair.
  const DebugEnv::StepResult sub = env.step(Action::submit());
  CHECK(sub.done);
  CHECK(env.done());
  CHECK(env.state().step == 1);
  REQUIRE(env.final_objective().has_value());
  CHECK(*env.final_objective() ==
        doctest::Approx(inst.ground_truth.original_objective));
  CHECK(classify_outcome(env.state().status, env.final_objective(),
                         inst.ground_truth.original_objective) == Outcome::FullSuccess);
}

TEST_CASE("transport fixture recovers through the labeled demand relaxation") {
  const BenchmarkInstance inst = load_fixture("transport_overallocation.json");
  DebugEnv env(inst);
  CHECK(env.state().iis_log.size() == 8);

  const DebugEnv::StepResult fix = env.step(Action::relax("d1_min", -15.0));
  CHECK(env.state().status == SolveStatus::OPTIMAL);
  CHECK(fix.reward.outcome_raw == doctest::Approx(100.0));
  env.step(Action::submit());
  CHECK(env.done());
  REQUIRE(env.final_objective().has_value());
  CHECK(optimality_preservation(*env.final_objective(),
                                inst.ground_truth.original_objective) ==
        doctest::Approx(1.0));
}

TEST_CASE("submitting an unrepaired model ends the episode without a step") {
  DebugEnv env(load_fixture("production_conflict.json"));
  const DebugEnv::StepResult res = env.step(Action::submit());
  CHECK(res.done);
  CHECK(env.state().step == 0);
  CHECK(env.state().status == SolveStatus::INFEASIBLE);
  CHECK(res.reward.outcome_raw == doctest::Approx(-50.0));
  CHECK_THROWS_AS(env.step(Action::get_iis()), Error);
}

TEST_CASE("invalid repairs leave the state unchanged and get penalized") {
  DebugEnv env(load_fixture("production_conflict.json"));
  const std::string before_model = serialize_model(env.state().code);
  const DebugEnv::StepResult res = env.step(Action::relax("no_such_row", -5.0));
  CHECK_FALSE(res.done);
  CHECK(env.state().step == 0);
  CHECK(serialize_model(env.state().code) == before_model);
  CHECK(env.state().status == SolveStatus::INFEASIBLE);
  CHECK(res.reward.faithfulness_penalty == doctest::Approx(20.0));
  CHECK(env.state().history.size() == 1);  // the attempt is still on record
}

TEST_CASE("restart rolls back to the sabotaged model at step cost one") {
  const BenchmarkInstance inst = load_fixture("production_conflict.json");
  DebugEnv env(inst);
  env.step(Action::relax("c3_min_1", -10.0));
  CHECK(env.state().status == SolveStatus::OPTIMAL);

  const DebugEnv::StepResult res = env.step(Action::restart());
  CHECK_FALSE(res.done);
  CHECK(env.state().step == 2);
  CHECK(serialize_model(env.state().code) == serialize_model(inst.sabotaged));
  CHECK(env.state().status == SolveStatus::INFEASIBLE);
  CHECK(env.state().iis_log == inst.ground_truth.iis_gt.members);
}

TEST_CASE("diagnostics populate and refresh their views") {
  DebugEnv env(load_fixture("production_conflict.json"));
  env.step(Action::check_slack());
  env.step(Action::check_bound());
  REQUIRE(env.state().slack_values.has_value());
  REQUIRE(env.state().bound_status.has_value());
  CHECK(env.state().step == 0);
  CHECK(env.state().slack_values->count("c1_total") == 1);
  // The model is infeasible, so the reported least-violation point must break
  // something: either an explicit row (negative slack) or a variable bound.
  bool any_violated = false;
  for (const auto& [name, slack] : *env.state().slack_values) {
    any_violated |= slack < -1e-9;
  }
  for (const auto& [var, status] : *env.state().bound_status) {
    CHECK((status == "fixed" || status == "below_lower" || status == "above_upper" ||
           status == "at_lower" || status == "at_upper" || status == "interior"));
    any_violated |= status == "below_lower" || status == "above_upper";
  }
  CHECK(any_violated);

  // After the repair the engaged views are re-derived from the new solve.
  env.step(Action::relax("c3_min_1", -10.0));
  REQUIRE(env.state().slack_values.has_value());
  for (const auto& [name, slack] : *env.state().slack_values) {
    CHECK(slack >= -1e-7);  // feasible now: nothing violated
  }
}

TEST_CASE("costed diagnostics consume steps when configured") {
  EnvConfig cfg;
  cfg.diagnostic_actions_free = false;
  DebugEnv env(load_fixture("production_conflict.json"), cfg);
  env.step(Action::get_iis());
  CHECK(env.state().step == 1);
}

TEST_CASE("step budget terminates episodes") {
  EnvConfig cfg;
  cfg.max_steps = 1;
  DebugEnv env(load_fixture("production_conflict.json"), cfg);
  const DebugEnv::StepResult res = env.step(Action::relax("c1_total", 1.0));
  CHECK(res.done);
  CHECK(env.done());
}

TEST_CASE("diagnostic loops run into the action cap") {
  EnvConfig cfg;
  cfg.max_steps = 2;
  DebugEnv env(load_fixture("production_conflict.json"), cfg);
  int actions = 0;
  while (!env.done()) {
    env.step(Action::get_iis());
    ++actions;
    REQUIRE(actions <= 8);
  }
  CHECK(actions == 8);  // 4 * max_steps
  CHECK(env.action_count() == 8);
}

TEST_CASE("environment construction rejects corrupt instances") {
  BenchmarkInstance bad = load_fixture("production_conflict.json");
  bad.sabotaged = bad.original;  // feasible "sabotage"
  CHECK_THROWS_AS(DebugEnv{bad}, OracleDisagreementError);
}

TEST_CASE("state digests track state content") {
  const BenchmarkInstance inst = load_fixture("production_conflict.json");
  DebugEnv a(inst);
  DebugEnv b(inst);
  CHECK(state_digest(a.state()) == state_digest(b.state()));
  a.step(Action::relax("c3_min_1", -10.0));
  CHECK(state_digest(a.state()) != state_digest(b.state()));
}

TEST_CASE("transition model: diagnostics and wrong targets change nothing") {
  const GroundTruth gt = three_member_gt();
  Rng rng(7);
  const EpisodeState s = infeasible_state(0, {"c1", "c2", "c3"});
  const EpisodeState after_diag = simulate_step(Action::get_iis(), s, gt, rng);
  CHECK(serialize_state(after_diag) == serialize_state(s));

  for (int i = 0; i < 200; ++i) {
    const EpisodeState next =
        simulate_step(Action::relax("outside", -1.0), s, gt, rng);
    CHECK(next.status == SolveStatus::INFEASIBLE);
    CHECK(next.iis_log == s.iis_log);
    CHECK(next.step == 1);
  }
}

TEST_CASE("transition model: key repairs mostly succeed") {
  GroundTruth gt = three_member_gt();
  gt.key_constraints = {"c3"};
  Rng rng(99);
  const EpisodeState s = infeasible_state(0, {"c1", "c2", "c3"});

  int relax_wins = 0;
  int drop_wins = 0;
  int shrink = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    relax_wins += simulate_step(Action::relax("c3", -1.0), s, gt, rng).status ==
                  SolveStatus::OPTIMAL;
    drop_wins += simulate_step(Action::drop("c3"), s, gt, rng).status ==
                 SolveStatus::OPTIMAL;
    const EpisodeState after = simulate_step(Action::relax("c1", -1.0), s, gt, rng);
    CHECK(after.status == SolveStatus::INFEASIBLE);  // non-key never solves it
    if (after.iis_log.size() == 2) {
      ++shrink;
      CHECK(std::find(after.iis_log.begin(), after.iis_log.end(), "c1") ==
            after.iis_log.end());
    }
  }
  CHECK(relax_wins / static_cast<double>(trials) == doctest::Approx(0.9).epsilon(0.035));
  CHECK(drop_wins / static_cast<double>(trials) == doctest::Approx(0.7).epsilon(0.05));
  CHECK(shrink / static_cast<double>(trials) == doctest::Approx(0.5).epsilon(0.07));
}

TEST_CASE("optimality preservation and outcome boundaries") {
  CHECK(optimality_preservation(97.0, 100.0) == doctest::Approx(0.97));
  CHECK(optimality_preservation(85.0, 100.0) == doctest::Approx(0.85));
  CHECK(optimality_preservation(100.0, 100.0) == doctest::Approx(1.0));

  CHECK(classify_outcome(SolveStatus::OPTIMAL, 97.0, 100.0) == Outcome::FullSuccess);
  CHECK(classify_outcome(SolveStatus::OPTIMAL, 85.0, 100.0) == Outcome::PartialSuccess);
  // The tier edges belong to the lower class: OP must strictly exceed them.
  CHECK(classify_outcome(SolveStatus::OPTIMAL, 95.0, 100.0) == Outcome::PartialSuccess);
  CHECK(classify_outcome(SolveStatus::OPTIMAL, 80.0, 100.0) == Outcome::Failure);
  CHECK(classify_outcome(SolveStatus::OPTIMAL, 50.0, 100.0) == Outcome::Failure);
  CHECK(classify_outcome(SolveStatus::INFEASIBLE, std::nullopt, 100.0) == Outcome::Failure);
  CHECK(classify_outcome(SolveStatus::UNBOUNDED, std::nullopt, 100.0) == Outcome::Failure);
}

TEST_CASE("environment config is validated") {
  EnvConfig cfg;
  cfg.max_steps = 0;
  CHECK_THROWS_AS(cfg.check(), InvalidModelError);
  cfg.max_steps = 1;
  cfg.per_solve_timeout = 0.0;
  CHECK_THROWS_AS(cfg.check(), InvalidModelError);
}
