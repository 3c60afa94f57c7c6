// Seed-model pool: families of small feasible-and-bounded LPs that the
// saboteur corrupts into benchmark instances.
#pragma once

#include <cstdint>
#include <vector>

#include "orgym/model.hpp"
#include "orgym/rng.hpp"

namespace orgym {

struct PoolConfig {
  int size = 60;
  std::uint64_t rng_seed = 1;
};

// Production planning: nonnegative outputs with finite capacities, per-product
// minimum quotas, redundant single-product and aggregate floors, a wide
// demand row over a product subset, and weighted resource caps. Minimizes
// total cost. Every generated model solves OPTIMAL.
LpModel make_production_model(int num_vars, Rng& rng);

// Hub transshipment: supply arcs s_i (capacity rows), demand arcs t_j
// (minimum-demand rows), and one flow-balance equality through the hub.
// Total capacity exceeds total demand by a small headroom, so scaling any
// one demand by >= 1.2 overruns capacity. Minimizes shipping cost.
LpModel make_transport_model(int num_sources, int num_sinks, Rng& rng);

// Fractional set covering: unit-box variables and >= coverage rows over
// random subsets. Minimizes activation cost.
LpModel make_covering_model(int num_vars, int num_rows, Rng& rng);

// Deterministic pool: cycles the three families across a size ladder, one
// RNG substream per index (parallel generation gives identical output).
// Verifies every model solves OPTIMAL before returning.
std::vector<LpModel> generate_pool(const PoolConfig& cfg);

// JSONL persistence (one canonical model per line).
void write_pool_file(const std::string& path, const std::vector<LpModel>& pool);
std::vector<LpModel> read_pool_file(const std::string& path);

}  // namespace orgym
