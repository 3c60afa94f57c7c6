// Sabotage pipeline tests: taxonomy metadata, per-type generation through
// four-fold validation, difficulty assignment, eligibility prechecks, name
// consistency on rewritten models, determinism, and pool exhaustion.
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "orgym/iis.hpp"
#include "orgym/pool.hpp"
#include "orgym/saboteur.hpp"
#include "orgym/solver.hpp"
#include "test_util.hpp"

using namespace orgym;
using orgym::testutil::load_fixture;

namespace {

std::vector<LpModel> shared_pool() {
  PoolConfig cfg;
  cfg.size = 60;
  cfg.rng_seed = 5;
  return generate_pool(cfg);
}

std::vector<BenchmarkInstance> shared_bench() {
  std::map<char, int> counts;
  for (const ErrorTypeInfo& info : error_type_table()) counts[info.code] = 2;
  SabotageConfig cfg;
  cfg.rng_seed = 41;
  return generate_benchmark(shared_pool(), counts, cfg);
}

// All legal row names of a model: explicit constraints plus bound rows.
std::set<std::string> row_names(const LpModel& m) {
  std::set<std::string> names;
  for (const PseudoRow& row : build_rows(m)) names.insert(row.name);
  return names;
}

BenchmarkInstance fake_instance(char type, int iis_size) {
  BenchmarkInstance inst;
  inst.error_type = type;
  inst.ground_truth.iis_gt.size = iis_size;
  return inst;
}

}  // namespace

TEST_CASE("taxonomy covers nine types in code order") {
  const auto& table = error_type_table();
  REQUIRE(table.size() == 9);
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(table[i].code == static_cast<char>('A' + i));
    CHECK(table[i].iis_min >= 2);
    CHECK(table[i].iis_min <= table[i].iis_max);
  }
  CHECK(error_type_info('F').name == std::string("Capacity Violation"));
  CHECK_THROWS_AS(error_type_info('Z'), InvalidModelError);
}

TEST_CASE("sabotage config rejects nonsense knobs") {
  SabotageConfig cfg;
  CHECK_NOTHROW(cfg.check());
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.check(), InvalidModelError);
  cfg.alpha = 1.3;
  cfg.num_candidates = 0;
  CHECK_THROWS_AS(cfg.check(), InvalidModelError);
  cfg.num_candidates = 10;
  cfg.max_regenerations = -1;
  CHECK_THROWS_AS(cfg.check(), InvalidModelError);
}

TEST_CASE("every generated instance passes four-fold validation") {
  const std::vector<BenchmarkInstance> bench = shared_bench();
  REQUIRE(bench.size() == 18);

  std::map<char, int> histogram;
  std::set<std::string> ids;
  for (const BenchmarkInstance& inst : bench) {
    ++histogram[inst.error_type];
    ids.insert(inst.id);

    const ValidationReport rep = validate(inst);
    INFO(inst.id, " phase ", rep.failed_phase, ": ", rep.detail);
    CHECK(rep.pass);
    CHECK(inst.difficulty == assign_difficulty(inst));
    CHECK_FALSE(inst.ground_truth.fix.empty());
    CHECK(inst.ground_truth.iis_gt.size ==
          static_cast<int>(inst.ground_truth.iis_gt.members.size()));
  }
  for (const ErrorTypeInfo& info : error_type_table()) {
    CHECK(histogram[info.code] == 2);
  }
  // Instance ids embed the type code and a hex tag; a stream-collision bug
  // once made distinct slots reuse the same tag, so uniqueness is load-bearing.
  CHECK(ids.size() == bench.size());
}

TEST_CASE("key constraints sit inside the conflict for direct types") {
  for (const BenchmarkInstance& inst : shared_bench()) {
    if (inst.error_type == 'F' || inst.error_type == 'G') continue;
    for (const std::string& key : inst.ground_truth.key_constraints) {
      INFO(inst.id, " key ", key);
      CHECK(inst.ground_truth.iis_gt.contains(key));
    }
  }
}

TEST_CASE("fix and conflict names always exist on the sabotaged model") {
  // Types G-I rewrite or rename rows; whatever the ground truth references
  // must still resolve against the model the agent actually sees.
  for (const BenchmarkInstance& inst : shared_bench()) {
    const std::set<std::string> names = row_names(inst.sabotaged);
    for (const std::string& member : inst.ground_truth.iis_gt.members) {
      INFO(inst.id, " conflict member ", member);
      CHECK(names.count(member) == 1);
    }
    for (const ModelEdit& e : inst.ground_truth.fix) {
      if (e.kind == ModelEdit::Kind::kAddConstraint) continue;
      if (e.kind == ModelEdit::Kind::kSetBound) {
        INFO(inst.id, " fix bound target ", e.target);
        CHECK(inst.sabotaged.find_variable(e.target) != nullptr);
      } else {
        INFO(inst.id, " fix target ", e.target);
        CHECK(names.count(e.target) == 1);
      }
    }
  }
}

TEST_CASE("bound-corruption instances carry a root cause") {
  int seen_f = 0;
  for (const BenchmarkInstance& inst : shared_bench()) {
    if (inst.error_type != 'F') continue;
    ++seen_f;
    REQUIRE(inst.root_cause.has_value());
    REQUIRE_FALSE(inst.ground_truth.key_constraints.empty());
    // The symptom row anchors the conflict even though the true cause is a
    // variable bound.
    CHECK(inst.ground_truth.iis_gt.contains(inst.ground_truth.key_constraints.front()));
  }
  CHECK(seen_f == 2);
}

TEST_CASE("cascade ground truths are well-formed when present") {
  for (const BenchmarkInstance& inst : shared_bench()) {
    if (!inst.cascade) continue;
    CHECK(inst.error_type == 'G');
    CHECK_FALSE(inst.cascade->fix.empty());
    CHECK(inst.cascade->iis_gt.size > 0);
  }
}

TEST_CASE("validation pinpoints the failing phase") {
  const BenchmarkInstance good = load_fixture("production_conflict.json");
  REQUIRE(validate(good).pass);

  SUBCASE("infeasible original fails phase 1") {
    BenchmarkInstance bad = good;
    bad.original = bad.sabotaged;
    const ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failed_phase == 1);
  }
  SUBCASE("feasible sabotage fails phase 2") {
    BenchmarkInstance bad = good;
    bad.sabotaged = bad.original;
    const ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failed_phase == 2);
  }
  SUBCASE("stale stored conflict fails phase 3") {
    BenchmarkInstance bad = good;
    bad.ground_truth.iis_gt.members.pop_back();
    bad.ground_truth.iis_gt.size -= 1;
    const ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failed_phase == 3);
  }
  SUBCASE("fix anchored outside the conflict fails phase 3") {
    BenchmarkInstance bad = good;
    bad.ground_truth.fix = {ModelEdit::relax("c4_min_2", -10.0)};
    const ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failed_phase == 3);
  }
  SUBCASE("fix that does not restore optimality fails phase 4") {
    BenchmarkInstance bad = good;
    // Tightening instead of loosening keeps the model infeasible.
    bad.ground_truth.fix = {ModelEdit::relax("c3_min_1", 10.0)};
    const ValidationReport rep = validate(bad);
    CHECK_FALSE(rep.pass);
    CHECK(rep.failed_phase == 4);
  }
}

TEST_CASE("difficulty tiers follow the conflict size") {
  CHECK(assign_difficulty(fake_instance('A', 2)) == Difficulty::Easy);
  CHECK(assign_difficulty(fake_instance('B', 4)) == Difficulty::Easy);
  CHECK(assign_difficulty(fake_instance('E', 5)) == Difficulty::Hard);
  CHECK(assign_difficulty(fake_instance('E', 7)) == Difficulty::Hard);
  // Sizes 8..10 split by type: the two composite types rate Expert.
  CHECK(assign_difficulty(fake_instance('E', 8)) == Difficulty::Hard);
  CHECK(assign_difficulty(fake_instance('H', 8)) == Difficulty::Expert);
  CHECK(assign_difficulty(fake_instance('I', 10)) == Difficulty::Expert);
  CHECK(assign_difficulty(fake_instance('B', 11)) == Difficulty::Expert);
}

TEST_CASE("eligibility precheck screens structurally hopeless seeds") {
  // Regression: unit-box covering models cannot be made infeasible by cutting
  // one upper bound (the remaining slack always covers the row), and the
  // precheck must say so instead of burning injection attempts.
  const std::vector<LpModel> pool = shared_pool();
  int coverings = 0;
  int capacity_eligible = 0;
  for (const LpModel& m : pool) {
    const bool covering = m.description.find("covering") != std::string::npos ||
                          m.constraints.front().name.rfind("cover", 0) == 0;
    if (covering) {
      ++coverings;
      CHECK_FALSE(precheck(m, 'F'));
    }
    capacity_eligible += precheck(m, 'F');
  }
  CHECK(coverings > 0);
  CHECK(capacity_eligible > 0);

  // Over-allocation needs a transport shape; production models are exempt.
  int transport_eligible = 0;
  for (const LpModel& m : pool) transport_eligible += precheck(m, 'E');
  CHECK(transport_eligible > 0);
  CHECK(transport_eligible < static_cast<int>(pool.size()));
}

TEST_CASE("generation is deterministic in the seed") {
  const std::vector<LpModel> pool = shared_pool();
  const std::map<char, int> counts{{'A', 2}, {'E', 1}, {'H', 1}};
  SabotageConfig cfg;
  cfg.rng_seed = 123;
  const std::vector<BenchmarkInstance> a = generate_benchmark(pool, counts, cfg);
  const std::vector<BenchmarkInstance> b = generate_benchmark(pool, counts, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize_instance(a[i]) == serialize_instance(b[i]));
  }

  SabotageConfig other = cfg;
  other.rng_seed = 124;
  const std::vector<BenchmarkInstance> c = generate_benchmark(pool, counts, other);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_difference |= serialize_instance(a[i]) != serialize_instance(c[i]);
  }
  CHECK(any_difference);
}

TEST_CASE("an exhausted pool reports the shortfall") {
  PoolConfig pcfg;
  pcfg.size = 5;
  pcfg.rng_seed = 9;
  const std::vector<LpModel> tiny = generate_pool(pcfg);
  SabotageConfig cfg;
  cfg.rng_seed = 1;
  CHECK_THROWS_AS(generate_benchmark(tiny, {{'E', 50}}, cfg), PoolExhaustedError);
}

TEST_CASE("fixtures validate end to end") {
  for (const char* name : {"production_conflict.json", "transport_overallocation.json"}) {
    const BenchmarkInstance inst = load_fixture(name);
    const ValidationReport rep = validate(inst);
    INFO(name, " phase ", rep.failed_phase, ": ", rep.detail);
    CHECK(rep.pass);
    CHECK(inst.difficulty == assign_difficulty(inst));
  }
}
