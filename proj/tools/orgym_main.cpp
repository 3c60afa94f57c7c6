// orgym: command-line front end for the LP debugging benchmark toolkit.
//
// Subcommands:
//   gen-debug  generate a verified-infeasible debugging benchmark (JSONL)
//   validate   re-run the four-fold validation over a benchmark file
//   eval       run an agent (builtin or external process) over a benchmark
//   gen-bias   emit a newsvendor bias dataset (id / ood / both / curriculum)
//   eval-bias  score recorded order decisions against a bias dataset
//   report     recompute and print the metrics table from a records file
//   replay     re-execute recorded trajectories and verify digests/rewards
//
// Every run writes a sidecar RunManifest (<artifact>.manifest.json) carrying
// the tool version, seed, knobs, and input/output content digests. Artifact
// bytes depend only on inputs and seed, never on time or host.
//
// Exit codes: 0 success; 1 operational failure (with a one-line JSON error
// on stderr); 2 usage errors.
#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "orgym/agents.hpp"
#include "orgym/env.hpp"
#include "orgym/errors.hpp"
#include "orgym/evaluator.hpp"
#include "orgym/jsonio.hpp"
#include "orgym/manifest.hpp"
#include "orgym/newsvendor.hpp"
#include "orgym/parallel.hpp"
#include "orgym/pool.hpp"
#include "orgym/saboteur.hpp"
#include "orgym/solver.hpp"

namespace {

using namespace orgym;

// "A=5,B=3" -> {A:5, B:3}. Types must exist; zero counts are dropped.
std::map<char, int> parse_counts_arg(const std::string& s) {
  std::map<char, int> counts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    const std::string item =
        s.substr(pos, comma == std::string::npos ? std::string::npos
                                                 : comma - pos);
    if (item.size() < 3 || item[1] != '=') {
      throw ParseError("bad --counts item '" + item + "' (want e.g. A=5)");
    }
    const char type = item[0];
    error_type_info(type);  // throws on unknown type
    int n = 0;
    try {
      n = std::stoi(item.substr(2));
    } catch (const std::exception&) {
      throw ParseError("bad count in '" + item + "'");
    }
    if (n < 0) throw ParseError("negative count in '" + item + "'");
    if (n > 0) counts[type] = n;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (counts.empty()) throw ParseError("--counts named no positive counts");
  return counts;
}

std::string counts_to_string(const std::map<char, int>& counts) {
  std::string out;
  for (const auto& [type, n] : counts) {
    if (!out.empty()) out += ',';
    out += type;
    out += '=';
    out += std::to_string(n);
  }
  return out;
}

RunManifest base_manifest(const std::string& command, std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.seed = seed;
  m.created_utc = now_utc();
  return m;
}

struct GenDebugArgs {
  std::string out;
  int per_type = 5;
  std::string counts;
  int pool_size = 60;
  std::uint64_t seed = 0;
  double alpha = 1.3;
  bool fixed_alpha = false;
  int max_regenerations = 3;
  int candidates = 10;
};

int cmd_gen_debug(const GenDebugArgs& a) {
  std::map<char, int> counts;
  if (!a.counts.empty()) {
    counts = parse_counts_arg(a.counts);
  } else {
    for (const ErrorTypeInfo& info : error_type_table()) {
      counts[info.code] = a.per_type;
    }
  }
  PoolConfig pcfg;
  pcfg.size = a.pool_size;
  pcfg.rng_seed = substream_seed(a.seed, "pool");
  const std::vector<LpModel> pool = generate_pool(pcfg);

  SabotageConfig scfg;
  scfg.alpha = a.alpha;
  scfg.randomize_alpha = !a.fixed_alpha;
  scfg.max_regenerations = a.max_regenerations;
  scfg.num_candidates = a.candidates;
  scfg.rng_seed = substream_seed(a.seed, "bench");
  const std::vector<BenchmarkInstance> bench =
      generate_benchmark(pool, counts, scfg);
  write_benchmark_file(a.out, bench);

  std::map<char, int> emitted;
  for (const BenchmarkInstance& inst : bench) emitted[inst.error_type]++;
  std::string hist;
  for (const auto& [type, n] : emitted) {
    if (!hist.empty()) hist += ' ';
    hist += type;
    hist += ':';
    hist += std::to_string(n);
  }
  std::printf("wrote %zu instances (%s) to %s\n", bench.size(), hist.c_str(),
              a.out.c_str());

  RunManifest m = base_manifest("gen-debug", a.seed);
  m.config["counts"] = counts_to_string(counts);
  m.config["pool_size"] = std::to_string(a.pool_size);
  m.config["alpha"] = fmt_number(a.alpha);
  m.config["randomize_alpha"] = scfg.randomize_alpha ? "true" : "false";
  m.config["max_regenerations"] = std::to_string(a.max_regenerations);
  m.config["num_candidates"] = std::to_string(a.candidates);
  m.outputs[a.out] = file_digest(a.out);
  write_manifest(manifest_path_for(a.out), m);
  return 0;
}

int cmd_validate(const std::string& bench_path) {
  const std::vector<BenchmarkInstance> bench = read_benchmark_file(bench_path);
  if (bench.empty()) throw EmptyInputError("no instances in " + bench_path);
  std::vector<ValidationReport> reports(bench.size());
  parallel_for(bench.size(), [&](std::size_t i) {
    try {
      reports[i] = validate(bench[i]);
    } catch (const std::exception& e) {
      reports[i].pass = false;
      reports[i].detail = e.what();
    }
  });
  int passed = 0;
  for (std::size_t i = 0; i < bench.size(); ++i) {
    if (reports[i].pass) {
      ++passed;
      std::printf("PASS %s\n", bench[i].id.c_str());
    } else {
      std::printf("FAIL %s phase %d: %s\n", bench[i].id.c_str(),
                  reports[i].failed_phase, reports[i].detail.c_str());
    }
  }
  const double pct = 100.0 * passed / static_cast<double>(bench.size());
  if (passed == static_cast<int>(bench.size())) {
    std::printf("%d/%zu instances pass — 100%% pass\n", passed, bench.size());
  } else {
    std::printf("%d/%zu instances pass (%.1f%%)\n", passed, bench.size(), pct);
  }

  RunManifest m = base_manifest("validate", 0);
  m.inputs[bench_path] = file_digest(bench_path);
  m.config["passed"] = std::to_string(passed);
  m.config["total"] = std::to_string(bench.size());
  write_manifest(bench_path + ".validate.manifest.json", m);
  return passed == static_cast<int>(bench.size()) ? 0 : 1;
}

struct EvalArgs {
  std::string bench;
  std::string agent;
  int k = 5;
  int max_steps = 50;
  std::uint64_t seed = 0;
  std::string out;
  std::string report;
  double timeout = 120.0;
  double solve_timeout = 10.0;
  std::string strata = "none";
};

int cmd_eval(const EvalArgs& a) {
  std::vector<BenchmarkInstance> instances = read_benchmark_file(a.bench);
  if (a.strata != "none") {
    instances = stratified_sample(instances, stratified_preset(a.strata),
                                  substream_seed(a.seed, "strata-sample"));
  }
  const AgentFactory factory = make_agent_factory(a.agent, a.timeout);
  EvalConfig cfg;
  cfg.attempts = a.k;
  cfg.seed = a.seed;
  cfg.env.max_steps = a.max_steps;
  cfg.env.per_solve_timeout = a.solve_timeout;
  const std::vector<EpisodeRecord> records =
      run_episodes(factory, instances, cfg);
  write_records_file(a.out, records);
  const MetricsTable metrics = compute_metrics(records, a.k);
  if (!a.report.empty()) {
    write_file(a.report, serialize_metrics(metrics) + "\n");
  }
  std::fputs(render_metrics_table(metrics).c_str(), stdout);

  RunManifest m = base_manifest("eval", a.seed);
  m.inputs[a.bench] = file_digest(a.bench);
  m.config["agent"] = a.agent;
  m.config["k"] = std::to_string(a.k);
  m.config["max_steps"] = std::to_string(a.max_steps);
  m.config["timeout"] = fmt_number(a.timeout);
  m.config["solve_timeout"] = fmt_number(a.solve_timeout);
  m.config["strata"] = a.strata;
  m.outputs[a.out] = file_digest(a.out);
  if (!a.report.empty()) m.outputs[a.report] = file_digest(a.report);
  write_manifest(manifest_path_for(a.out), m);
  return 0;
}

struct GenBiasArgs {
  std::string out;
  std::string split = "both";
  std::uint64_t seed = 0;
};

int cmd_gen_bias(const GenBiasArgs& a) {
  std::vector<NewsvendorScenario> scenarios;
  if (a.split == "id") {
    scenarios = build_id_split(a.seed);
  } else if (a.split == "ood") {
    scenarios = build_ood_split(a.seed);
  } else if (a.split == "both") {
    scenarios = build_id_split(a.seed);
    const std::vector<NewsvendorScenario> ood = build_ood_split(a.seed);
    scenarios.insert(scenarios.end(), ood.begin(), ood.end());
  } else if (a.split == "curriculum") {
    scenarios = build_curriculum(a.seed);
  } else {
    throw ParseError("unknown split '" + a.split + "'");
  }
  write_dataset_file(a.out, scenarios);
  std::printf("wrote %zu scenarios (%s) to %s\n", scenarios.size(),
              a.split.c_str(), a.out.c_str());

  RunManifest m = base_manifest("gen-bias", a.seed);
  m.config["split"] = a.split;
  m.config["scenarios"] = std::to_string(scenarios.size());
  for (const auto& [level, range] : realized_cr_ranges(scenarios)) {
    m.config["cr_range_l" + std::to_string(level)] =
        "[" + fmt_number(range.lo) + ", " + fmt_number(range.hi) + "]";
  }
  m.outputs[a.out] = file_digest(a.out);
  write_manifest(manifest_path_for(a.out), m);
  return 0;
}

struct EvalBiasArgs {
  std::string dataset;
  std::string decisions;
  std::string out;
};

int cmd_eval_bias(const EvalBiasArgs& a) {
  const std::vector<NewsvendorScenario> dataset = read_dataset_file(a.dataset);
  const std::vector<Decision> decisions = read_decisions_file(a.decisions);
  const BiasReport report = evaluate_bias(decisions, dataset);
  if (!a.out.empty()) write_file(a.out, serialize_bias_report(report) + "\n");
  std::fputs(render_bias_report(report).c_str(), stdout);

  RunManifest m = base_manifest("eval-bias", 0);
  m.inputs[a.dataset] = file_digest(a.dataset);
  m.inputs[a.decisions] = file_digest(a.decisions);
  if (!a.out.empty()) {
    m.outputs[a.out] = file_digest(a.out);
    write_manifest(manifest_path_for(a.out), m);
  } else {
    write_manifest(a.decisions + ".eval-bias.manifest.json", m);
  }
  return 0;
}

struct ReportArgs {
  std::string records;
  int k = 0;  // 0: infer from the records
  std::string out;
};

int cmd_report(const ReportArgs& a) {
  const std::vector<EpisodeRecord> records = read_records_file(a.records);
  int attempts = a.k;
  if (attempts <= 0) {
    for (const EpisodeRecord& r : records) {
      attempts = std::max(attempts, r.attempt_index + 1);
    }
  }
  const MetricsTable metrics = compute_metrics(records, attempts);
  if (!a.out.empty()) write_file(a.out, serialize_metrics(metrics) + "\n");
  std::fputs(render_metrics_table(metrics).c_str(), stdout);

  RunManifest m = base_manifest("report", 0);
  m.inputs[a.records] = file_digest(a.records);
  m.config["k"] = std::to_string(attempts);
  if (!a.out.empty()) {
    m.outputs[a.out] = file_digest(a.out);
    write_manifest(manifest_path_for(a.out), m);
  } else {
    write_manifest(a.records + ".report.manifest.json", m);
  }
  return 0;
}

struct ReplayArgs {
  std::string records;
  std::string bench;
  int max_steps = 50;
  double solve_timeout = 10.0;
};

std::string reward_json(const RewardBreakdown& r) {
  JsonWriter w;
  write_reward(w, r);
  return w.str();
}

int cmd_replay(const ReplayArgs& a) {
  const std::vector<EpisodeRecord> records = read_records_file(a.records);
  const std::vector<BenchmarkInstance> bench = read_benchmark_file(a.bench);
  std::map<std::string, const BenchmarkInstance*> by_id;
  for (const BenchmarkInstance& inst : bench) by_id[inst.id] = &inst;

  EnvConfig cfg;
  cfg.max_steps = a.max_steps;
  cfg.per_solve_timeout = a.solve_timeout;

  std::size_t steps = 0;
  for (std::size_t ri = 0; ri < records.size(); ++ri) {
    const EpisodeRecord& rec = records[ri];
    const auto it = by_id.find(rec.instance_id);
    if (it == by_id.end()) {
      std::printf("record %zu: instance '%s' not in %s\n", ri,
                  rec.instance_id.c_str(), a.bench.c_str());
      return 1;
    }
    DebugEnv env(*it->second, cfg);
    for (std::size_t si = 0; si < rec.trajectory.size(); ++si) {
      const TrajectoryStep& ts = rec.trajectory[si];
      const std::string digest = state_digest(env.state());
      if (digest != ts.state_digest) {
        std::printf(
            "record %zu (%s attempt %d) step %zu: state digest %s != "
            "recorded %s\n",
            ri, rec.instance_id.c_str(), rec.attempt_index, si,
            digest.c_str(), ts.state_digest.c_str());
        return 1;
      }
      if (static_cast<int>(env.state().iis_log.size()) != ts.iis_before) {
        std::printf("record %zu step %zu: conflict size %zu != recorded %d\n",
                    ri, si, env.state().iis_log.size(), ts.iis_before);
        return 1;
      }
      const DebugEnv::StepResult res = env.step(ts.action);
      ++steps;
      if (reward_json(res.reward) != reward_json(ts.reward)) {
        std::printf("record %zu step %zu: reward %s != recorded %s\n", ri, si,
                    reward_json(res.reward).c_str(),
                    reward_json(ts.reward).c_str());
        return 1;
      }
      if (env.state().status != ts.status_after ||
          static_cast<int>(env.state().iis_log.size()) != ts.iis_after) {
        std::printf("record %zu step %zu: post-state diverged\n", ri, si);
        return 1;
      }
    }
  }
  std::printf("replayed %zu records (%zu steps): digests and rewards match\n",
              records.size(), steps);

  RunManifest m = base_manifest("replay", 0);
  m.inputs[a.records] = file_digest(a.records);
  m.inputs[a.bench] = file_digest(a.bench);
  m.config["max_steps"] = std::to_string(a.max_steps);
  m.config["records"] = std::to_string(records.size());
  m.config["steps"] = std::to_string(steps);
  write_manifest(a.records + ".replay.manifest.json", m);
  return 0;
}

std::string error_json(const std::string& what) {
  JsonWriter w;
  w.begin_object();
  w.key("error");
  w.value(what);
  w.end_object();
  return w.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LP debugging benchmark toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (0 = library default, 1 = serial)")
      ->envname("ORGYM_THREADS");

  GenDebugArgs gd;
  CLI::App* gen_debug =
      app.add_subcommand("gen-debug", "generate a debugging benchmark");
  gen_debug->add_option("--out", gd.out, "output benchmark JSONL")->required();
  gen_debug->add_option("--per-type", gd.per_type,
                        "instances per error type (A..I)");
  gen_debug->add_option("--counts", gd.counts,
                        "explicit per-type counts, e.g. A=5,B=3");
  gen_debug->add_option("--pool-size", gd.pool_size, "seed-model pool size");
  gen_debug->add_option("--seed", gd.seed, "master seed")
      ->envname("ORGYM_SEED");
  gen_debug->add_option("--alpha", gd.alpha,
                        "over-allocation factor (Type E)");
  gen_debug->add_flag("--fixed-alpha", gd.fixed_alpha,
                      "use --alpha verbatim instead of drawing U(1.2,1.5)");
  gen_debug->add_option("--max-regenerations", gd.max_regenerations,
                        "extra attempts per slot before giving up");
  gen_debug->add_option("--candidates", gd.candidates,
                        "injection sites considered per model");

  std::string validate_bench;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "four-fold validation of a benchmark");
  validate_cmd->add_option("--bench", validate_bench, "benchmark JSONL")
      ->required();

  EvalArgs ev;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "run an agent over a benchmark");
  eval_cmd->add_option("--bench", ev.bench, "benchmark JSONL")->required();
  eval_cmd
      ->add_option("--agent", ev.agent,
                   "oracle | greedy | random | cmd:<shell command>")
      ->required();
  eval_cmd->add_option("--k", ev.k, "attempts per instance");
  eval_cmd->add_option("--max-steps", ev.max_steps, "repair-step budget");
  eval_cmd->add_option("--seed", ev.seed, "master seed")->envname("ORGYM_SEED");
  eval_cmd->add_option("--out", ev.out, "episode records JSONL")->required();
  eval_cmd->add_option("--report", ev.report, "metrics report JSON");
  eval_cmd->add_option("--timeout", ev.timeout,
                       "external agent reply timeout (seconds)");
  eval_cmd->add_option("--solve-timeout", ev.solve_timeout,
                       "per-solve timeout (seconds)");
  eval_cmd
      ->add_option("--strata", ev.strata,
                   "stratified subset: none | default | even")
      ->check(CLI::IsMember({"none", "default", "even"}));

  GenBiasArgs gb;
  CLI::App* gen_bias =
      app.add_subcommand("gen-bias", "emit a newsvendor bias dataset");
  gen_bias->add_option("--out", gb.out, "output dataset JSONL")->required();
  gen_bias
      ->add_option("--split", gb.split, "id | ood | both | curriculum")
      ->check(CLI::IsMember({"id", "ood", "both", "curriculum"}));
  gen_bias->add_option("--seed", gb.seed, "master seed")->envname("ORGYM_SEED");

  EvalBiasArgs eb;
  CLI::App* eval_bias =
      app.add_subcommand("eval-bias", "score order decisions against a dataset");
  eval_bias->add_option("--dataset", eb.dataset, "dataset JSONL")->required();
  eval_bias->add_option("--decisions", eb.decisions, "decisions JSONL")
      ->required();
  eval_bias->add_option("--out", eb.out, "bias report JSON");

  ReportArgs rp;
  CLI::App* report_cmd =
      app.add_subcommand("report", "metrics table from a records file");
  report_cmd->add_option("--records", rp.records, "episode records JSONL")
      ->required();
  report_cmd->add_option("--k", rp.k,
                         "attempts per instance (0 = infer from records)");
  report_cmd->add_option("--out", rp.out, "metrics report JSON");

  ReplayArgs rpl;
  CLI::App* replay_cmd = app.add_subcommand(
      "replay", "re-execute recorded trajectories and verify them");
  replay_cmd->add_option("--records", rpl.records, "episode records JSONL")
      ->required();
  replay_cmd->add_option("--bench", rpl.bench, "benchmark JSONL")->required();
  replay_cmd->add_option("--max-steps", rpl.max_steps,
                         "repair-step budget used during recording");
  replay_cmd->add_option("--solve-timeout", rpl.solve_timeout,
                         "per-solve timeout (seconds)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }
  orgym::worker_threads() = threads;

  try {
    if (app.got_subcommand(gen_debug)) return cmd_gen_debug(gd);
    if (app.got_subcommand(validate_cmd)) return cmd_validate(validate_bench);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(ev);
    if (app.got_subcommand(gen_bias)) return cmd_gen_bias(gb);
    if (app.got_subcommand(eval_bias)) return cmd_eval_bias(eb);
    if (app.got_subcommand(report_cmd)) return cmd_report(rp);
    if (app.got_subcommand(replay_cmd)) return cmd_replay(rpl);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", error_json(e.what()).c_str());
    return 1;
  }
  return 2;
}
