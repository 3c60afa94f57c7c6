// Times the data-parallel kernels serial vs multi-threaded and verifies the
// two paths emit byte-identical artifacts (the serial path is the reference).
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "orgym/agents.hpp"
#include "orgym/evaluator.hpp"
#include "orgym/newsvendor.hpp"
#include "orgym/parallel.hpp"
#include "orgym/pool.hpp"
#include "orgym/saboteur.hpp"

using namespace orgym;

namespace {

double time_call(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, const std::function<std::string()>& run) {
  worker_threads() = 1;
  std::string serial_bytes;
  const double serial = time_call([&] { serial_bytes = run(); });
  worker_threads() = 0;
  std::string parallel_bytes;
  const double parallel = time_call([&] { parallel_bytes = run(); });
  const bool same = serial_bytes == parallel_bytes;
  std::printf("%-34s %9.3fs %9.3fs %7.2fx  %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0,
              same ? "identical" : "DIVERGED");
}

}  // namespace

int main() {
  PoolConfig pcfg;
  pcfg.size = 60;
  pcfg.rng_seed = 7;
  const std::vector<LpModel> pool = generate_pool(pcfg);

  std::map<char, int> counts;
  for (const ErrorTypeInfo& info : error_type_table()) counts[info.code] = 8;
  SabotageConfig scfg;
  scfg.rng_seed = 11;

  std::printf("%-34s %10s %10s %8s  %s\n", "kernel", "serial", "parallel",
              "speedup", "artifacts");

  std::vector<BenchmarkInstance> bench;
  row("benchmark generation (72 slots)", [&] {
    bench = generate_benchmark(pool, counts, scfg);
    std::string bytes;
    for (const BenchmarkInstance& inst : bench) bytes += serialize_instance(inst);
    return bytes;
  });

  row("episode evaluation (greedy, k=3)", [&] {
    EvalConfig cfg;
    cfg.attempts = 3;
    cfg.seed = 5;
    const std::vector<EpisodeRecord> records =
        run_episodes(make_agent_factory("greedy"), bench, cfg);
    std::string bytes;
    for (const EpisodeRecord& r : records) bytes += serialize_record(r);
    return bytes;
  });

  row("bias datasets (id+ood+train)", [&] {
    std::string bytes;
    for (const NewsvendorScenario& sc : build_id_split(17)) {
      bytes += serialize_scenario(sc);
    }
    for (const NewsvendorScenario& sc : build_ood_split(17)) {
      bytes += serialize_scenario(sc);
    }
    for (const NewsvendorScenario& sc : build_curriculum(17)) {
      bytes += serialize_scenario(sc);
    }
    return bytes;
  });

  return 0;
}
