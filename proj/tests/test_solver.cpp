// Simplex oracle tests: status classification on hand-checkable models,
// primal/dual certificates, the reduced-cost maintenance regression, and a
// box-bounded property sweep (a model whose variables all live in finite
// boxes can never be unbounded).
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "orgym/pool.hpp"
#include "orgym/rng.hpp"
#include "orgym/solver.hpp"
#include "test_util.hpp"

using namespace orgym;
using orgym::testutil::non_unit_pivot_lp;
using orgym::testutil::small_known_lp;
using orgym::testutil::tiny_infeasible_lp;

namespace {

// Strong duality certificate: sum dual * rhs over every pseudo-row (explicit
// constraints and finite bounds) must reproduce the optimal objective.
double dual_objective(const LpModel& m, const SolveResult& r) {
  std::map<std::string, double> rhs;
  for (const PseudoRow& row : build_rows(m)) rhs[row.name] = row.rhs;
  double total = 0.0;
  for (const auto& [name, dual] : r.duals) {
    REQUIRE(rhs.count(name) == 1);
    total += dual * rhs.at(name);
  }
  return total;
}

// Largest violation of any pseudo-row (bounds included) at the primal point.
double max_violation(const LpModel& m, const std::map<std::string, double>& x) {
  double worst = 0.0;
  for (const PseudoRow& row : build_rows(m)) {
    double activity = 0.0;
    for (const auto& [vi, coeff] : row.terms) {
      activity += coeff * x.at(m.variables[static_cast<std::size_t>(vi)].name);
    }
    double violation = 0.0;
    switch (row.sense) {
      case Sense::LE: violation = activity - row.rhs; break;
      case Sense::GE: violation = row.rhs - activity; break;
      case Sense::EQ: violation = std::fabs(activity - row.rhs); break;
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

void check_optimal_certificates(const LpModel& m, const SolveResult& r) {
  REQUIRE(r.status == SolveStatus::OPTIMAL);
  REQUIRE(r.objective.has_value());
  CHECK(max_violation(m, r.primal) <= 1e-6);
  const double scale = 1.0 + std::fabs(*r.objective);
  CHECK(std::fabs(dual_objective(m, r) - *r.objective) <= 1e-6 * scale);
}

LpModel random_boxed_lp(Rng& rng) {
  LpModel m;
  const int nv = static_cast<int>(rng.uniform_int(2, 4));
  for (int i = 0; i < nv; ++i) {
    m.variables.push_back({"x" + std::to_string(i), 0.0, rng.uniform(1.0, 10.0),
                           rng.uniform(-5.0, 5.0)});
  }
  const int nc = static_cast<int>(rng.uniform_int(1, 4));
  for (int c = 0; c < nc; ++c) {
    Constraint row;
    row.name = "r" + std::to_string(c);
    for (int i = 0; i < nv; ++i) {
      if (rng.chance(0.6)) {
        double coeff = rng.uniform(-3.0, 3.0);
        if (std::fabs(coeff) < 0.1) coeff = 1.0;
        row.terms[m.variables[static_cast<std::size_t>(i)].name] = coeff;
      }
    }
    if (row.terms.empty()) {
      row.terms[m.variables[0].name] = 1.0;
    }
    row.sense = rng.chance(0.5) ? Sense::LE : Sense::GE;
    row.rhs = rng.uniform(-10.0, 20.0);
    m.constraints.push_back(row);
  }
  return m;
}

}  // namespace

TEST_CASE("known LP solves to its hand-computed optimum") {
  const LpModel m = small_known_lp();
  const SolveResult r = solve(m);
  REQUIRE(r.status == SolveStatus::OPTIMAL);
  // min 3x + 2y, x + y >= 4, boxes [0,3]: push y to its cap, x picks up the rest.
  CHECK(*r.objective == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(r.primal.at("x") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.primal.at("y") == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.slacks.at("cover") == doctest::Approx(0.0).epsilon(1e-9));
  check_optimal_certificates(m, r);
}

TEST_CASE("free variables may settle at negative values") {
  LpModel m;
  m.variables.push_back({"x", -kInf, kInf, 1.0});
  Constraint c;
  c.name = "floor";
  c.terms = {{"x", 1.0}};
  c.sense = Sense::GE;
  c.rhs = -5.0;
  m.constraints.push_back(c);
  const SolveResult r = solve(m);
  REQUIRE(r.status == SolveStatus::OPTIMAL);
  CHECK(*r.objective == doctest::Approx(-5.0).epsilon(1e-9));
  CHECK(r.primal.at("x") == doctest::Approx(-5.0).epsilon(1e-9));
}

TEST_CASE("maximization flips the optimization direction") {
  LpModel m = small_known_lp();
  m.objective_sense = ObjSense::MAX;
  const SolveResult r = solve(m);
  REQUIRE(r.status == SolveStatus::OPTIMAL);
  // max 3x + 2y over the same feasible box: both variables at their caps.
  CHECK(*r.objective == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(r.primal.at("x") == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.primal.at("y") == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("infeasible model reports a least-violation point") {
  const LpModel m = tiny_infeasible_lp();
  const SolveResult r = solve(m);
  REQUIRE(r.status == SolveStatus::INFEASIBLE);
  CHECK(r.infeasibility > 1.0);  // the two rows are 3 units apart
  CHECK_FALSE(r.objective.has_value());
  // At any point, at least one of the two contradicting rows is violated.
  const double worst =
      std::min(r.slacks.at("at_least_4"), r.slacks.at("at_most_1"));
  CHECK(worst < 0.0);
}

TEST_CASE("missing upper bound on an improving ray is reported unbounded") {
  LpModel m;
  m.variables.push_back({"x", 0.0, kInf, -1.0});
  Constraint c;
  c.name = "floor";
  c.terms = {{"x", 1.0}};
  c.sense = Sense::GE;
  c.rhs = 1.0;
  m.constraints.push_back(c);
  const SolveResult r = solve(m);
  CHECK(r.status == SolveStatus::UNBOUNDED);
}

TEST_CASE("regression: non-unit pivots keep maintained reduced costs exact") {
  // Both rows of this model pivot on a coefficient of 2. A former bug scaled
  // the maintained reduced-cost vector by the pivot element twice, after
  // which the solver misclassified bounded covering models as UNBOUNDED.
  const LpModel m = non_unit_pivot_lp();
  const SolveResult r = solve(m);
  REQUIRE(r.status == SolveStatus::OPTIMAL);
  CHECK(*r.objective == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(r.primal.at("a") == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(r.primal.at("b") == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  check_optimal_certificates(m, r);
}

TEST_CASE("regression: every pool model solves optimal with certificates") {
  // The covering family (non-unit coefficients on >= rows) is the shape that
  // exposed the reduced-cost bug; sweep full pools under several seeds.
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    PoolConfig cfg;
    cfg.size = 60;
    cfg.rng_seed = seed;
    const std::vector<LpModel> pool = generate_pool(cfg);
    REQUIRE(pool.size() == 60);
    for (const LpModel& m : pool) {
      const SolveResult r = solve(m);
      INFO("pool seed ", seed, " model '", m.description, "'");
      check_optimal_certificates(m, r);
    }
  }
}

TEST_CASE("property: box-bounded models are never unbounded") {
  Rng rng(20260816);
  int optimal = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const LpModel m = random_boxed_lp(rng);
    const SolveResult r = solve(m);
    INFO("trial ", trial);
    REQUIRE((r.status == SolveStatus::OPTIMAL || r.status == SolveStatus::INFEASIBLE));
    if (r.status == SolveStatus::OPTIMAL) {
      ++optimal;
      check_optimal_certificates(m, r);
    } else {
      CHECK(r.infeasibility > 0.0);
    }
  }
  // The generator is loose enough that both statuses must actually occur.
  CHECK(optimal > 20);
  CHECK(optimal < 200);
}

TEST_CASE("complementary slackness holds on pool optima") {
  PoolConfig cfg;
  cfg.size = 15;
  cfg.rng_seed = 11;
  for (const LpModel& m : generate_pool(cfg)) {
    const SolveResult r = solve(m);
    REQUIRE(r.status == SolveStatus::OPTIMAL);
    std::map<std::string, double> row_slack;
    for (const PseudoRow& row : build_rows(m)) {
      double activity = 0.0;
      for (const auto& [vi, coeff] : row.terms) {
        activity += coeff * r.primal.at(m.variables[static_cast<std::size_t>(vi)].name);
      }
      row_slack[row.name] = activity - row.rhs;
    }
    for (const auto& [name, dual] : r.duals) {
      if (std::fabs(dual) > 1e-7) {
        INFO("model '", m.description, "' row ", name);
        CHECK(std::fabs(row_slack.at(name)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("iteration cap surfaces as status ERROR, never a crash") {
  SolverConfig cfg;
  cfg.max_iterations = 1;
  const SolveResult r = solve(small_known_lp(), cfg);
  CHECK(r.status == SolveStatus::ERROR);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("build_rows lists explicit rows first, then bounds per variable") {
  LpModel m = small_known_lp();  // x in [0,3], y in [0,3], one constraint
  m.variables[0].lower = 1.0;
  const std::vector<PseudoRow> rows = build_rows(m);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].name == "cover");
  CHECK_FALSE(rows[0].is_bound);
  CHECK(rows[1].name == "x__lb");
  CHECK(rows[1].sense == Sense::GE);
  CHECK(rows[1].rhs == 1.0);
  CHECK(rows[2].name == "x__ub");
  CHECK(rows[2].sense == Sense::LE);
  CHECK(rows[3].name == "y__lb");
  CHECK(rows[4].name == "y__ub");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].is_bound);
}

TEST_CASE("infinite bounds produce no pseudo-rows") {
  LpModel m;
  m.variables.push_back({"x", -kInf, kInf, 1.0});
  Constraint c;
  c.name = "anchor";
  c.terms = {{"x", 1.0}};
  c.sense = Sense::EQ;
  c.rhs = 2.0;
  m.constraints.push_back(c);
  const std::vector<PseudoRow> rows = build_rows(m);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].name == "anchor");
  CHECK(rows[0].sense == Sense::EQ);
}

TEST_CASE("constraint slacks follow the documented sign convention") {
  const LpModel m = small_known_lp();
  const std::map<std::string, double> point{{"x", 2.0}, {"y", 1.0}};
  const auto slacks = constraint_slacks(m, point);
  // cover is >=: slack = activity - rhs = 3 - 4 = -1 (violated).
  CHECK(slacks.at("cover") == doctest::Approx(-1.0).epsilon(1e-12));

  const std::map<std::string, double> incomplete{{"x", 2.0}};
  CHECK_THROWS_AS(constraint_slacks(m, incomplete), UnknownVariableError);
}

TEST_CASE("solve_feasibility ignores the objective") {
  // The objective ray is unbounded, but a feasible point exists.
  LpModel m;
  m.variables.push_back({"x", 0.0, kInf, -1.0});
  Constraint c;
  c.name = "floor";
  c.terms = {{"x", 1.0}};
  c.sense = Sense::GE;
  c.rhs = 1.0;
  m.constraints.push_back(c);
  REQUIRE(solve(m).status == SolveStatus::UNBOUNDED);
  CHECK(solve_feasibility(m).status == SolveStatus::OPTIMAL);
}

TEST_CASE("row_system_feasibility classifies subsystems") {
  const LpModel m = tiny_infeasible_lp();
  const std::vector<PseudoRow> rows = build_rows(m);
  REQUIRE(rows.size() == 2);
  CHECK(row_system_feasibility(rows, 1) == SolveStatus::INFEASIBLE);
  CHECK(row_system_feasibility({rows[0]}, 1) == SolveStatus::OPTIMAL);
  CHECK(row_system_feasibility({rows[1]}, 1) == SolveStatus::OPTIMAL);
  CHECK(row_system_feasibility({}, 1) == SolveStatus::OPTIMAL);
}

TEST_CASE("solver output is deterministic") {
  const LpModel m = small_known_lp();
  CHECK(serialize_result(solve(m)) == serialize_result(solve(m)));

  PoolConfig cfg;
  cfg.size = 5;
  cfg.rng_seed = 99;
  for (const LpModel& pm : generate_pool(cfg)) {
    CHECK(serialize_result(solve(pm)) == serialize_result(solve(pm)));
  }
}
