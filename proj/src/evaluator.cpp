#include "orgym/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "orgym/errors.hpp"
#include "orgym/parallel.hpp"

namespace orgym {

namespace {

void write_trajectory_step(JsonWriter& w, const TrajectoryStep& t) {
  w.begin_object();
  w.key("state_digest");
  w.value(t.state_digest);
  w.key("action");
  write_action(w, t.action);
  w.key("reward");
  write_reward(w, t.reward);
  w.key("status_after");
  w.value(to_string(t.status_after));
  w.key("iis_before");
  w.value(t.iis_before);
  w.key("iis_after");
  w.value(t.iis_after);
  w.end_object();
}

TrajectoryStep parse_trajectory_step(const Json& j) {
  TrajectoryStep t;
  t.state_digest = j.at("state_digest").get<std::string>();
  t.action = parse_action(j.at("action"));
  t.reward = parse_reward(j.at("reward"));
  t.status_after = solve_status_from_string(j.at("status_after").get<std::string>());
  t.iis_before = j.at("iis_before").get<int>();
  t.iis_after = j.at("iis_after").get<int>();
  return t;
}

}  // namespace

std::string serialize_record(const EpisodeRecord& r) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("instance_id");
  w.value(r.instance_id);
  w.key("error_type");
  w.value(std::string(1, r.error_type));
  w.key("difficulty");
  w.value(to_string(r.difficulty));
  w.key("attempt_index");
  w.value(r.attempt_index);
  w.key("success");
  w.value(r.success);
  w.key("first_success_step");
  if (r.first_success_step) w.value(*r.first_success_step);
  else w.value_null();
  w.key("da");
  w.value(r.da);
  w.key("op");
  w.value(r.op);
  w.key("repair_steps");
  w.value(r.repair_steps);
  w.key("outcome");
  w.value(to_string(r.outcome));
  w.key("protocol_error");
  w.value(r.protocol_error);
  w.key("trajectory");
  w.begin_array();
  for (const TrajectoryStep& t : r.trajectory) write_trajectory_step(w, t);
  w.end_array();
  w.end_object();
  return w.str();
}

EpisodeRecord parse_record(const Json& j) {
  EpisodeRecord r;
  r.instance_id = j.at("instance_id").get<std::string>();
  const std::string code = j.at("error_type").get<std::string>();
  if (code.size() != 1) throw ParseError("error_type must be a single letter");
  r.error_type = code[0];
  r.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
  r.attempt_index = j.at("attempt_index").get<int>();
  r.success = j.at("success").get<bool>();
  if (!j.at("first_success_step").is_null()) {
    r.first_success_step = j.at("first_success_step").get<int>();
  }
  r.da = j.at("da").get<double>();
  r.op = j.at("op").get<double>();
  r.repair_steps = j.at("repair_steps").get<int>();
  r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
  r.protocol_error = j.at("protocol_error").get<bool>();
  for (const auto& t : j.at("trajectory")) {
    r.trajectory.push_back(parse_trajectory_step(t));
  }
  return r;
}

EpisodeRecord parse_record_text(const std::string& line) {
  return parse_record(parse_json(line, "episode record"));
}

void write_records_file(const std::string& path, const std::vector<EpisodeRecord>& records) {
  std::string out;
  for (const EpisodeRecord& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<EpisodeRecord> read_records_file(const std::string& path) {
  std::vector<EpisodeRecord> out;
  for (const std::string& line : read_lines(path)) out.push_back(parse_record_text(line));
  return out;
}

namespace {

EpisodeRecord run_one_episode(const BenchmarkInstance& inst, int attempt,
                              const AgentFactory& factory, const EvalConfig& cfg) {
  EpisodeRecord rec;
  rec.instance_id = inst.id;
  rec.error_type = inst.error_type;
  rec.difficulty = inst.difficulty;
  rec.attempt_index = attempt;

  const std::uint64_t episode_seed =
      substream_seed(cfg.seed, "episode", fnv1a64(inst.id),
                     static_cast<std::uint64_t>(attempt));

  DebugEnv env(inst, cfg.env);
  std::set<std::string> diagnosed;
  int action_index = 0;
  try {
    auto agent = factory(inst, episode_seed);
    while (!env.done()) {
      const EpisodeState& s = env.state();
      TrajectoryStep ts;
      ts.state_digest = state_digest(s);
      ts.iis_before = static_cast<int>(s.iis_log.size());
      const Action a = agent->act(s);
      const DebugEnv::StepResult res = env.step(a);
      ++action_index;
      ts.action = a;
      ts.reward = res.reward;
      ts.status_after = env.state().status;
      ts.iis_after = static_cast<int>(env.state().iis_log.size());
      rec.trajectory.push_back(std::move(ts));
      if (a.diagnosis) diagnosed.insert(a.diagnosis->begin(), a.diagnosis->end());
      if (env.state().status == SolveStatus::OPTIMAL && !rec.first_success_step) {
        rec.first_success_step = action_index;
      }
    }
  } catch (const ProtocolError&) {
    rec.protocol_error = true;
  }

  const GroundTruth& gt = inst.ground_truth;
  if (gt.iis_gt.size > 0) {
    int hits = 0;
    for (const std::string& d : diagnosed) hits += gt.iis_gt.contains(d);
    rec.da = static_cast<double>(hits) / gt.iis_gt.size;
  }
  rec.repair_steps = env.state().step;
  if (rec.protocol_error) {
    rec.outcome = Outcome::Failure;
  } else {
    rec.outcome = classify_outcome(env.state().status, env.final_objective(),
                                   gt.original_objective);
  }
  rec.success = rec.outcome != Outcome::Failure;
  if (rec.success && env.final_objective()) {
    rec.op = optimality_preservation(*env.final_objective(), gt.original_objective);
  }
  return rec;
}

}  // namespace

std::vector<EpisodeRecord> run_episodes(const AgentFactory& factory,
                                        const std::vector<BenchmarkInstance>& instances,
                                        const EvalConfig& cfg) {
  if (cfg.attempts < 1) throw InvalidModelError("attempts must be >= 1");
  cfg.env.check();
  const int total = static_cast<int>(instances.size()) * cfg.attempts;
  std::vector<EpisodeRecord> records(static_cast<std::size_t>(total));
  std::vector<std::string> failures(static_cast<std::size_t>(total));
  parallel_for(total, [&](int g) {
    const int inst_idx = g / cfg.attempts;
    const int attempt = g % cfg.attempts;
    try {
      records[static_cast<std::size_t>(g)] =
          run_one_episode(instances[static_cast<std::size_t>(inst_idx)], attempt,
                          factory, cfg);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(g)] = e.what();
    }
  });
  for (std::size_t g = 0; g < failures.size(); ++g) {
    if (!failures[g].empty()) {
      throw Error("episode " + instances[g / cfg.attempts].id + "#" +
                  std::to_string(g % cfg.attempts) + " failed: " + failures[g]);
    }
  }
  return records;
}

namespace {

struct Accumulator {
  std::map<std::string, std::vector<const EpisodeRecord*>> by_instance;
  double da_sum = 0.0;
  double op_sum = 0.0;
  double steps_sum = 0.0;
  int successes = 0;
  int records = 0;

  void add(const EpisodeRecord& r) {
    by_instance[r.instance_id].push_back(&r);
    da_sum += r.da;
    ++records;
    if (r.success) {
      ++successes;
      op_sum += r.op;
      steps_sum += r.repair_steps;
    }
  }

  // Best (lowest) first-success step over FullSuccess attempts, if any.
  static std::optional<int> best_full_step(const std::vector<const EpisodeRecord*>& rs) {
    std::optional<int> best;
    for (const EpisodeRecord* r : rs) {
      if (r->outcome != Outcome::FullSuccess || !r->first_success_step) continue;
      if (!best || *r->first_success_step < *best) best = *r->first_success_step;
    }
    return best;
  }

  MetricsSummary summary() const {
    MetricsSummary s;
    s.num_instances = static_cast<int>(by_instance.size());
    s.num_records = records;
    if (records == 0) return s;
    int recovered = 0;
    int full_at_5 = 0;
    for (const auto& [id, rs] : by_instance) {
      const bool any_success =
          std::any_of(rs.begin(), rs.end(), [](const EpisodeRecord* r) { return r->success; });
      recovered += any_success;
      const auto best = best_full_step(rs);
      full_at_5 += best && *best <= 5;
    }
    s.rr = 100.0 * recovered / s.num_instances;
    s.rr_at_5 = 100.0 * full_at_5 / s.num_instances;
    s.da_mean = 100.0 * da_sum / records;
    s.op_mean = successes > 0 ? op_sum / successes : 0.0;
    s.avg_steps = successes > 0 ? steps_sum / successes : 0.0;
    return s;
  }
};

}  // namespace

MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records, int attempts) {
  if (records.empty()) throw EmptyInputError("no episode records to aggregate");
  MetricsTable table;
  table.attempts = attempts;

  Accumulator overall;
  std::map<char, Accumulator> by_type;
  std::map<Difficulty, Accumulator> by_tier;
  for (const EpisodeRecord& r : records) {
    overall.add(r);
    by_type[r.error_type].add(r);
    by_tier[r.difficulty].add(r);
  }
  table.overall = overall.summary();
  for (const auto& [t, acc] : by_type) table.per_error_type[t] = acc.summary();
  for (const auto& [d, acc] : by_tier) table.per_difficulty[d] = acc.summary();

  for (const int k : {1, 2, 3, 4, 5, 10, 20, 50}) {
    int hit = 0;
    for (const auto& [id, rs] : overall.by_instance) {
      const auto best = Accumulator::best_full_step(rs);
      hit += best && *best <= k;
    }
    table.rr_at_k[k] = 100.0 * hit / static_cast<double>(overall.by_instance.size());
  }
  return table;
}

namespace {

void write_summary(JsonWriter& w, const MetricsSummary& s) {
  w.begin_object();
  w.key("rr");
  w.value(s.rr);
  w.key("rr_at_5");
  w.value(s.rr_at_5);
  w.key("da_mean");
  w.value(s.da_mean);
  w.key("op_mean");
  w.value(s.op_mean);
  w.key("avg_steps");
  w.value(s.avg_steps);
  w.key("num_instances");
  w.value(s.num_instances);
  w.key("num_records");
  w.value(s.num_records);
  w.end_object();
}

}  // namespace

std::string serialize_metrics(const MetricsTable& m) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("attempts");
  w.value(m.attempts);
  w.key("overall");
  write_summary(w, m.overall);
  w.key("rr_at_k");
  w.begin_object();
  for (const auto& [k, v] : m.rr_at_k) {
    w.key(std::to_string(k));
    w.value(v);
  }
  w.end_object();
  w.key("per_error_type");
  w.begin_object();
  for (const auto& [t, s] : m.per_error_type) {
    w.key(std::string(1, t));
    write_summary(w, s);
  }
  w.end_object();
  w.key("per_difficulty");
  w.begin_object();
  for (const auto& [d, s] : m.per_difficulty) {
    w.key(to_string(d));
    write_summary(w, s);
  }
  w.end_object();
  w.end_object();
  return w.str();
}

std::string render_metrics_table(const MetricsTable& m) {
  std::string out;
  char line[160];
  const auto row = [&](const std::string& label, const MetricsSummary& s) {
    std::snprintf(line, sizeof(line), "%-10s %7.1f%% %7.1f%% %7.1f%% %7.2f %6d\n",
                  label.c_str(), s.rr, s.rr_at_5, s.da_mean, s.avg_steps,
                  s.num_instances);
    out += line;
  };
  std::snprintf(line, sizeof(line), "%-10s %8s %8s %8s %7s %6s\n", "scope", "RR",
                "RR@5", "DA", "Steps", "N");
  out += line;
  out += std::string(52, '-');
  out += '\n';
  row("overall", m.overall);
  for (const auto& [t, s] : m.per_error_type) row(std::string(1, t), s);
  for (const auto& [d, s] : m.per_difficulty) row(std::string(to_string(d)), s);
  return out;
}

std::vector<BenchmarkInstance> stratified_sample(
    const std::vector<BenchmarkInstance>& bench,
    const std::map<Difficulty, int>& counts, std::uint64_t seed) {
  std::vector<BenchmarkInstance> out;
  for (const auto& [tier, want] : counts) {
    if (want < 0) throw InvalidModelError("negative tier count");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < bench.size(); ++i) {
      if (bench[i].difficulty == tier) idx.push_back(i);
    }
    if (static_cast<int>(idx.size()) < want) {
      throw InsufficientPoolError(
          "tier " + std::string(to_string(tier)) + " has " +
          std::to_string(idx.size()) + " instances, need " + std::to_string(want));
    }
    Rng rng = substream(seed, "strata", static_cast<std::uint64_t>(tier));
    rng.shuffle(idx);
    for (int i = 0; i < want; ++i) out.push_back(bench[idx[static_cast<std::size_t>(i)]]);
  }
  return out;
}

std::map<Difficulty, int> stratified_preset(const std::string& name) {
  if (name == "default") {
    return {{Difficulty::Easy, 180}, {Difficulty::Hard, 158}, {Difficulty::Expert, 112}};
  }
  if (name == "even") {
    return {{Difficulty::Easy, 200}, {Difficulty::Hard, 150}, {Difficulty::Expert, 100}};
  }
  throw ParseError("unknown stratified preset '" + name + "' (default|even)");
}

std::vector<double> prm_label(const std::vector<TrajectoryStep>& trajectory,
                              const GroundTruth& gt) {
  std::vector<double> labels;
  labels.reserve(trajectory.size());
  for (const TrajectoryStep& t : trajectory) {
    double label = 0.0;
    if (t.status_after == SolveStatus::OPTIMAL) {
      label = 1.0;
    } else if (t.iis_after < t.iis_before) {
      label = 1.0;
    } else if (t.action.diagnosis &&
               std::any_of(t.action.diagnosis->begin(), t.action.diagnosis->end(),
                           [&](const std::string& d) { return gt.iis_gt.contains(d); })) {
      label = 0.5;
    } else if (is_diagnostic(t.action.kind)) {
      label = 0.2;
    }
    labels.push_back(label);
  }
  return labels;
}

std::vector<EpisodeRecord> filter_sft_trajectories(
    const std::vector<EpisodeRecord>& records) {
  std::vector<EpisodeRecord> out;
  for (const EpisodeRecord& r : records) {
    if (r.success && r.repair_steps <= 5 && r.da >= 0.5) out.push_back(r);
  }
  return out;
}

}  // namespace orgym
