// Controlled infeasibility injection: nine error types, four-fold candidate
// validation, difficulty tiers, and benchmark emission.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orgym/iis.hpp"
#include "orgym/model.hpp"
#include "orgym/rng.hpp"
#include "orgym/solver.hpp"

namespace orgym {

enum class Difficulty { Easy, Medium, Hard, Expert };
std::string_view to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view s);

// Static metadata for one error type: taxonomy code, display name, the IIS
// size range the construction aims for, and the nominal difficulty label.
struct ErrorTypeInfo {
  char code;
  const char* name;
  int iis_min;
  int iis_max;
  Difficulty label;
};

// The nine error types, codes 'A'..'I', in code order.
const std::vector<ErrorTypeInfo>& error_type_table();
const ErrorTypeInfo& error_type_info(char code);

struct SabotageConfig {
  // Over-allocation factor used when randomize_alpha is false; when true
  // (default) each injection draws alpha uniformly from [1.2, 1.5].
  double alpha = 1.3;
  bool randomize_alpha = true;
  int num_candidates = 10;
  int max_regenerations = 3;
  std::uint64_t rng_seed = 0;

  void check() const;
};

// What the saboteur knows about an instance: the constraints it corrupted,
// the repair that restores optimality, the IIS of the sabotaged model, and
// the original optimal objective.
struct GroundTruth {
  std::vector<std::string> key_constraints;
  std::vector<ModelEdit> fix;
  IisReport iis_gt;
  double original_objective = 0.0;
};

struct BenchmarkInstance {
  std::string id;
  char error_type = 'A';
  LpModel original;
  LpModel sabotaged;
  GroundTruth ground_truth;
  // Type F: the corrupted variable bound (the fix target); the IIS shows
  // only the symptom constraint plus bound rows.
  std::optional<std::string> root_cause;
  // Type G: the secondary conflict exposed after the primary fix.
  std::optional<GroundTruth> cascade;
  Difficulty difficulty = Difficulty::Easy;
};

// Result of one injection attempt before instance assembly.
struct Injection {
  LpModel sabotaged;
  GroundTruth gt;
  std::optional<std::string> root_cause;
  std::optional<GroundTruth> cascade;
};

// Structural eligibility of a seed model for an error type; used to skip
// hopeless pool entries without spending injection attempts.
bool precheck(const LpModel& model, char error_type);

// Corrupts `model` per the error type's construction. Returns nullopt when
// every candidate/tier fails (caller retries with another seed model).
// Precondition: solve(model).status == OPTIMAL.
std::optional<Injection> inject(const LpModel& model, char error_type,
                                const SabotageConfig& cfg, Rng& rng);

struct ValidationReport {
  bool pass = false;
  int failed_phase = 0;  // 1..4, or 0 when pass
  std::string detail;
};

// Four-fold check: (1) original OPTIMAL, (2) sabotaged INFEASIBLE, (3) IIS
// non-empty and containing the fix target (Type F: the symptom), (4) the
// ground-truth fix (plus cascade fix, Type G) restores OPTIMAL.
ValidationReport validate(const BenchmarkInstance& inst, const SolverConfig& scfg = {});

// Tier from the actual IIS size: <=4 Easy, 5..7 Hard, 8..10 Expert for
// Types H/I and Hard otherwise, >=11 Expert.
Difficulty assign_difficulty(const BenchmarkInstance& inst);

// Emits counts[type] validated instances per type. Deterministic under
// (pool, cfg.rng_seed); parallel per slot. Throws PoolExhaustedError with a
// shortfall report when regeneration cannot fill a slot.
std::vector<BenchmarkInstance> generate_benchmark(
    const std::vector<LpModel>& pool, const std::map<char, int>& counts,
    const SabotageConfig& cfg);

// Instance (de)serialization: canonical single-line JSON.
std::string serialize_instance(const BenchmarkInstance& inst);
BenchmarkInstance parse_instance(const Json& j);
BenchmarkInstance parse_instance_text(const std::string& line);
void write_benchmark_file(const std::string& path,
                          const std::vector<BenchmarkInstance>& instances);
std::vector<BenchmarkInstance> read_benchmark_file(const std::string& path);

}  // namespace orgym
