// Multi-attempt evaluation: runs agents over benchmark instances, records
// per-attempt episode trajectories, aggregates recovery/diagnosis metrics,
// draws stratified benchmark subsets, labels trajectory steps for process
// reward modeling, and filters trajectories for supervised fine-tuning.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orgym/agents.hpp"
#include "orgym/env.hpp"
#include "orgym/saboteur.hpp"

namespace orgym {

// One (state, action, reward) transition as recorded in an episode log.
struct TrajectoryStep {
  std::string state_digest;  // digest of the state the agent saw
  Action action;
  RewardBreakdown reward;
  SolveStatus status_after = SolveStatus::INFEASIBLE;
  int iis_before = 0;  // conflict size before/after the action
  int iis_after = 0;
};

struct EpisodeRecord {
  std::string instance_id;
  char error_type = 'A';
  Difficulty difficulty = Difficulty::Easy;
  int attempt_index = 0;
  bool success = false;  // final outcome is Full or Partial
  // 1-based index (over all actions, diagnostics included) of the first
  // action after which the model solved OPTIMAL; empty when that never
  // happened.
  std::optional<int> first_success_step;
  double da = 0.0;  // |union of diagnoses ∩ ground-truth conflict| / |conflict|
  double op = 0.0;  // optimality preservation of the final objective (0 on failure)
  int repair_steps = 0;  // final env step counter (model-modifying actions)
  Outcome outcome = Outcome::Failure;
  bool protocol_error = false;
  std::vector<TrajectoryStep> trajectory;
};

std::string serialize_record(const EpisodeRecord& r);
EpisodeRecord parse_record(const Json& j);
EpisodeRecord parse_record_text(const std::string& line);
void write_records_file(const std::string& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_records_file(const std::string& path);

struct EvalConfig {
  int attempts = 5;  // episodes per instance
  EnvConfig env;
  std::uint64_t seed = 0;
};

// Runs `attempts` episodes per instance, each with a fresh agent seeded from
// (seed, instance id, attempt). Protocol failures from external agents are
// recorded as failed attempts, never raised. Episodes run in parallel;
// record order is instance-major, attempt-minor, independent of thread
// schedule.
std::vector<EpisodeRecord> run_episodes(const AgentFactory& factory,
                                        const std::vector<BenchmarkInstance>& instances,
                                        const EvalConfig& cfg);

struct MetricsSummary {
  double rr = 0.0;        // % instances with a Full or Partial attempt
  double rr_at_5 = 0.0;   // % instances with a FullSuccess attempt in <= 5 steps
  double da_mean = 0.0;   // % mean diagnostic accuracy over all records
  double op_mean = 0.0;   // mean optimality preservation over successes
  double avg_steps = 0.0; // mean repair steps over successful records
  int num_instances = 0;
  int num_records = 0;
};

struct MetricsTable {
  MetricsSummary overall;
  // % instances whose best FullSuccess attempt finished within k actions.
  std::map<int, double> rr_at_k;
  std::map<char, MetricsSummary> per_error_type;
  std::map<Difficulty, MetricsSummary> per_difficulty;
  int attempts = 0;  // K used by the run
};

// Aggregates records grouped by instance. RR counts instances with any
// Full/Partial attempt; RR@k counts instances whose best FullSuccess attempt
// has first_success_step <= k; DA averages over every record; steps average
// over successful records only. Throws EmptyInputError on no records.
MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records, int attempts);

std::string serialize_metrics(const MetricsTable& m);
// Fixed-width text table: one row per scope (overall, per type, per tier)
// with RR, RR@5, DA, Steps columns.
std::string render_metrics_table(const MetricsTable& m);

// Draws an exact per-tier subset, deterministic under `seed`; the relative
// instance order within a tier is a seeded shuffle. Throws
// InsufficientPoolError when a tier has fewer instances than requested.
std::vector<BenchmarkInstance> stratified_sample(
    const std::vector<BenchmarkInstance>& bench,
    const std::map<Difficulty, int>& counts, std::uint64_t seed);

// Shipped tier mixes: "default" = {easy 180, hard 158, expert 112},
// "even" = {easy 200, hard 150, expert 100}. Throws ParseError otherwise.
std::map<Difficulty, int> stratified_preset(const std::string& name);

// Per-step progress labels, first matching branch wins:
//   1.0  the action reached OPTIMAL, or shrank the conflict;
//   0.5  its diagnosis names at least one true conflict member;
//   0.2  it is a diagnostic action;
//   0.0  otherwise.
std::vector<double> prm_label(const std::vector<TrajectoryStep>& trajectory,
                              const GroundTruth& gt);

// Keeps records suitable as supervised fine-tuning seeds: successful, at
// most 5 repair steps, diagnostic accuracy at least 0.5.
std::vector<EpisodeRecord> filter_sft_trajectories(const std::vector<EpisodeRecord>& records);

}  // namespace orgym
