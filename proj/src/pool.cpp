#include "orgym/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "orgym/errors.hpp"
#include "orgym/parallel.hpp"
#include "orgym/solver.hpp"

namespace orgym {

namespace {

double round1(double x) { return std::round(x * 10.0) / 10.0; }
double ceil1(double x) { return std::ceil(x * 10.0 - 1e-9) / 10.0; }

std::string desc_production(int n) {
  return "A production planning problem with " + std::to_string(n) +
         " products. Each product has a unit cost and a capacity limit; "
         "minimum production quotas and aggregate output floors must be met "
         "while shared resources cap weighted output. Objective: minimize "
         "total production cost.";
}

std::string desc_transport(int n_src, int n_snk) {
  return "A transshipment problem with " + std::to_string(n_src) +
         " supply nodes and " + std::to_string(n_snk) +
         " demand nodes connected through a central hub. Supply shipments "
         "are capacity-limited, hub flow must balance exactly, and every "
         "demand must be met. Objective: minimize total shipping cost.";
}

std::string desc_covering(int n, int rows) {
  return "A fractional set-covering problem with " + std::to_string(n) +
         " activities and " + std::to_string(rows) +
         " coverage requirements. Each requirement needs a minimum combined "
         "activity level from its subset. Objective: minimize total "
         "activation cost.";
}

}  // namespace

LpModel make_production_model(int num_vars, Rng& rng) {
  if (num_vars < 3) throw InvalidModelError("production model needs >= 3 variables");
  const int n = num_vars;
  LpModel m;
  m.objective_sense = ObjSense::MIN;
  m.description = desc_production(n);

  std::vector<double> ub(n), cost(n), quota(n, 0.0);
  for (int i = 0; i < n; ++i) {
    ub[i] = round1(rng.uniform(40.0, 120.0));
    cost[i] = round1(rng.uniform(2.0, 12.0));
    m.variables.push_back({"x" + std::to_string(i), 0.0, ub[i], cost[i]});
  }

  // Per-product minimum quotas on most products (always at least two).
  int quota_count = 0;
  for (int i = 0; i < n; ++i) {
    if (i < 2 || rng.chance(0.8)) {
      quota[i] = round1(rng.uniform(5.0, 0.45 * ub[i]));
      m.constraints.push_back({"min_" + std::to_string(i),
                               {{m.variables[i].name, 1.0}},
                               Sense::GE,
                               quota[i]});
      ++quota_count;
    }
  }
  (void)quota_count;

  // Redundant floors: strictly dominated by the quota rows, so they carry
  // positive slack at any feasible point (sense-flip targets).
  int floors = 1 + (rng.chance(0.5) ? 1 : 0);
  for (int f = 0; f < floors; ++f) {
    // Pick a quota-bearing product deterministically from the stream.
    std::vector<int> with_quota;
    for (int i = 0; i < n; ++i) {
      if (quota[i] > 0.0) with_quota.push_back(i);
    }
    const int i = with_quota[static_cast<std::size_t>(rng.index(with_quota.size()))];
    const std::string name = "floor_" + std::to_string(i);
    if (m.find_constraint(name) != nullptr) continue;
    m.constraints.push_back({name,
                             {{m.variables[i].name, 1.0}},
                             Sense::GE,
                             round1(rng.uniform(0.2, 0.7) * quota[i])});
  }

  // Aggregate floor across every product: redundant against the quotas.
  double quota_sum = std::accumulate(quota.begin(), quota.end(), 0.0);
  Constraint agg{"agg_floor", {}, Sense::GE, round1(0.5 * quota_sum)};
  for (int i = 0; i < n; ++i) agg.terms[m.variables[i].name] = 1.0;
  m.constraints.push_back(agg);

  // Reference feasible point: quotas, then raised on the demand subset.
  std::vector<double> ref(quota.begin(), quota.end());

  // Wide demand row over a 4..6 product subset when the model is big enough.
  if (n >= 4) {
    const int width = std::min(n, 4 + static_cast<int>(rng.index(3)));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(width);
    std::sort(idx.begin(), idx.end());
    double ub_sum = 0.0;
    for (int i : idx) ub_sum += ub[i];
    const double demand = round1(rng.uniform(0.7, 0.85) * ub_sum);
    Constraint d{"demand_main", {}, Sense::GE, demand};
    for (int i : idx) d.terms[m.variables[i].name] = 1.0;
    m.constraints.push_back(d);
    // Raise the reference point proportionally toward the bounds until the
    // demand row holds with a little margin.
    double have = 0.0;
    for (int i : idx) have += ref[i];
    if (have < demand) {
      double room = 0.0;
      for (int i : idx) room += ub[i] - ref[i];
      const double scale = std::min(1.0, (demand * 1.02 - have) / room);
      for (int i : idx) ref[i] += scale * (ub[i] - ref[i]);
    }
  }

  // Weighted resource caps over 2..4 product subsets, sized from the
  // reference point so the model stays feasible.
  const int res_rows = 1 + (rng.chance(0.6) ? 1 : 0);
  for (int r = 0; r < res_rows; ++r) {
    const int width = std::min(n, 2 + static_cast<int>(rng.index(3)));
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(width);
    std::sort(idx.begin(), idx.end());
    Constraint res{"res_" + std::to_string(r), {}, Sense::LE, 0.0};
    double used = 0.0;
    for (int i : idx) {
      const double w = round1(rng.uniform(1.0, 3.0));
      res.terms[m.variables[i].name] = w;
      used += w * ref[i];
    }
    res.rhs = ceil1(std::max(used * rng.uniform(1.2, 1.5), used + 5.0));
    m.constraints.push_back(res);
  }

  m.check();
  return m;
}

LpModel make_transport_model(int num_sources, int num_sinks, Rng& rng) {
  if (num_sources < 2 || num_sinks < 2) {
    throw InvalidModelError("transport model needs >= 2 sources and sinks");
  }
  LpModel m;
  m.objective_sense = ObjSense::MIN;
  m.description = desc_transport(num_sources, num_sinks);

  for (int i = 0; i < num_sources; ++i) {
    m.variables.push_back({"s" + std::to_string(i), 0.0, kInf,
                           round1(rng.uniform(2.0, 8.0))});
  }
  for (int j = 0; j < num_sinks; ++j) {
    m.variables.push_back({"t" + std::to_string(j), 0.0, kInf,
                           round1(rng.uniform(1.0, 6.0))});
  }

  // Demands within a factor of two of each other: the over-allocation edit
  // (scale the largest by alpha >= 1.2) then always overruns capacity, and
  // every demand row lands in the resulting conflict.
  const double base = round1(rng.uniform(25.0, 60.0));
  std::vector<double> dem(num_sinks);
  double dem_sum = 0.0, dem_max = 0.0;
  for (int j = 0; j < num_sinks; ++j) {
    dem[j] = round1(rng.uniform(0.6, 1.0) * base);
    dem_sum += dem[j];
    dem_max = std::max(dem_max, dem[j]);
  }

  // Total capacity = total demand + small headroom (< 0.2 * largest demand).
  const double headroom = rng.uniform(0.05, 0.15) * dem_max;
  std::vector<double> share(num_sources);
  double share_sum = 0.0;
  for (int i = 0; i < num_sources; ++i) {
    share[i] = rng.uniform(0.5, 1.0);
    share_sum += share[i];
  }
  for (int i = 0; i < num_sources; ++i) {
    const double cap = ceil1((dem_sum + headroom) * share[i] / share_sum);
    m.constraints.push_back({"cap_" + std::to_string(i),
                             {{m.variables[i].name, 1.0}},
                             Sense::LE,
                             cap});
  }
  for (int j = 0; j < num_sinks; ++j) {
    m.constraints.push_back({"dem_" + std::to_string(j),
                             {{"t" + std::to_string(j), 1.0}},
                             Sense::GE,
                             dem[j]});
  }
  Constraint bal{"balance", {}, Sense::EQ, 0.0};
  for (int i = 0; i < num_sources; ++i) bal.terms["s" + std::to_string(i)] = 1.0;
  for (int j = 0; j < num_sinks; ++j) bal.terms["t" + std::to_string(j)] = -1.0;
  m.constraints.push_back(bal);

  m.check();
  return m;
}

LpModel make_covering_model(int num_vars, int num_rows, Rng& rng) {
  if (num_vars < 4 || num_rows < 2) {
    throw InvalidModelError("covering model needs >= 4 variables and >= 2 rows");
  }
  LpModel m;
  m.objective_sense = ObjSense::MIN;
  m.description = desc_covering(num_vars, num_rows);

  for (int i = 0; i < num_vars; ++i) {
    m.variables.push_back({"x" + std::to_string(i), 0.0, 1.0,
                           round1(rng.uniform(1.0, 9.0))});
  }
  for (int r = 0; r < num_rows; ++r) {
    const int width = 3 + static_cast<int>(rng.index(3));
    std::vector<int> idx(num_vars);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    idx.resize(std::min(width, num_vars));
    std::sort(idx.begin(), idx.end());
    Constraint row{"cover_" + std::to_string(r), {}, Sense::GE, 0.0};
    for (int i : idx) row.terms[m.variables[i].name] = 1.0;
    // Satisfiable at the all-ones point: rhs < |subset|.
    row.rhs = round1(rng.uniform(1.0, 0.6 * static_cast<double>(idx.size())));
    m.constraints.push_back(row);
  }

  m.check();
  return m;
}

std::vector<LpModel> generate_pool(const PoolConfig& cfg) {
  if (cfg.size < 1) throw InvalidModelError("pool size must be >= 1");
  std::vector<LpModel> pool(static_cast<std::size_t>(cfg.size));
  std::vector<std::string> failures(static_cast<std::size_t>(cfg.size));

  parallel_for(cfg.size, [&](int idx) {
    try {
      Rng rng = substream(cfg.rng_seed, "pool", static_cast<std::uint64_t>(idx));
      LpModel model;
      // Family rotation with a size ladder; production appears most often
      // because most sabotage types feed on it.
      switch (idx % 5) {
        case 0:
          model = make_production_model(3 + idx / 5 % 4, rng);
          break;
        case 1: {
          static const int src[] = {2, 2, 3, 3, 2, 3};
          static const int snk[] = {2, 3, 3, 4, 4, 5};
          const int k = idx / 5 % 6;
          model = make_transport_model(src[k], snk[k], rng);
          break;
        }
        case 2:
          model = make_production_model(7 + idx / 5 % 8, rng);
          break;
        case 3: {
          static const int nv[] = {8, 10, 12, 14};
          const int k = idx / 5 % 4;
          model = make_covering_model(nv[k], 4 + k, rng);
          break;
        }
        default:
          model = make_production_model(9 + idx / 5 % 6, rng);
          break;
      }
      const SolveResult r = solve(model);
      if (r.status != SolveStatus::OPTIMAL) {
        failures[static_cast<std::size_t>(idx)] =
            "pool model " + std::to_string(idx) + " solved " +
            std::string(to_string(r.status));
        return;
      }
      pool[static_cast<std::size_t>(idx)] = std::move(model);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(idx)] = e.what();
    }
  });

  for (const std::string& f : failures) {
    if (!f.empty()) throw OracleDisagreementError("pool generation failed: " + f);
  }
  return pool;
}

void write_pool_file(const std::string& path, const std::vector<LpModel>& pool) {
  std::string out;
  for (const LpModel& m : pool) {
    out += serialize_model(m);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<LpModel> read_pool_file(const std::string& path) {
  std::vector<LpModel> pool;
  for (const std::string& line : read_lines(path)) {
    pool.push_back(parse_model_text(line));
  }
  if (pool.empty()) throw ParseError("pool file is empty: " + path);
  return pool;
}

}  // namespace orgym
