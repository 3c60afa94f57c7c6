// Inventory-decision benchmark tests: the normal quantile helper, the
// closed-form order oracle (cross-checked by a Monte-Carlo profit sweep),
// scenario generation and the split builders, prompt information hygiene,
// free-text answer parsing, and the pull-to-center bias metrics.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "orgym/newsvendor.hpp"
#include "orgym/rng.hpp"

using namespace orgym;

namespace {

NewsvendorScenario craft(double price, double cost, double salvage, double mu,
                         double sigma, const std::string& id = "crafted") {
  NewsvendorScenario sc;
  sc.id = id;
  sc.price = price;
  sc.cost = cost;
  sc.salvage = salvage;
  sc.mu = mu;
  sc.sigma = sigma;
  sc.cr = (price - cost) / (price - salvage);
  sc.cr_bucket = cr_bucket_name(sc.cr);
  sc.q_opt = optimal_q(sc);
  return sc;
}

Decision answer(const std::string& id, double q) {
  Decision d;
  d.scenario_id = id;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", q);
  d.raw_response = buf;
  d.q = parse_order_quantity(d.raw_response);
  return d;
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

// Expected newsvendor profit under a stratified normal sample: with demand
// draws d_i sorted ascending and prefix sums,
//   profit(Q) = (p - s) * E[min(D, Q)] + (s - c) * Q.
struct ProfitCurve {
  std::vector<double> demand;  // ascending
  std::vector<double> prefix;  // prefix[i] = sum of demand[0..i)
  double price, cost, salvage;

  ProfitCurve(const NewsvendorScenario& sc, int n)
      : price(sc.price), cost(sc.cost), salvage(sc.salvage) {
    demand.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double u = (i + 0.5) / n;
      demand.push_back(sc.mu + sc.sigma * inv_norm_cdf(u));
    }
    prefix.resize(demand.size() + 1, 0.0);
    for (std::size_t i = 0; i < demand.size(); ++i) {
      prefix[i + 1] = prefix[i] + demand[i];
    }
  }

  double at(double q) const {
    const auto it = std::lower_bound(demand.begin(), demand.end(), q);
    const std::size_t below = static_cast<std::size_t>(it - demand.begin());
    const double n = static_cast<double>(demand.size());
    const double mean_min =
        (prefix[below] + q * (n - static_cast<double>(below))) / n;
    return (price - salvage) * mean_min + (salvage - cost) * q;
  }
};

}  // namespace

TEST_CASE("normal quantile meets its accuracy contract") {
  CHECK(inv_norm_cdf(0.5) == 0.0);  // exactly, not approximately

  CHECK_THROWS_AS(inv_norm_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inv_norm_cdf(1.0), DomainError);
  CHECK_THROWS_AS(inv_norm_cdf(-0.25), DomainError);
  CHECK_THROWS_AS(inv_norm_cdf(1.25), DomainError);

  Rng rng(808);
  double prev_u = 0.0, prev_x = -1e30;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform(1e-9, 1.0 - 1e-9);
    const double x = inv_norm_cdf(u);
    INFO("u = ", u);
    CHECK(std::fabs(norm_cdf(x) - u) < 1e-9);
    CHECK(std::fabs(inv_norm_cdf(1.0 - u) + x) < 1e-9);  // symmetry
    if (u > prev_u) CHECK(x > prev_x);
  }
  // Monotone over an ordered sweep as well.
  prev_x = -1e30;
  for (int i = 1; i < 1000; ++i) {
    const double x = inv_norm_cdf(i / 1000.0);
    CHECK(x > prev_x);
    prev_x = x;
  }
}

TEST_CASE("closed-form order quantity reproduces the reference points") {
  // CR 0.1 with mean 100, std 20.
  const NewsvendorScenario low = craft(100.0, 90.0, 0.0, 100.0, 20.0);
  CHECK(low.cr == doctest::Approx(0.1));
  CHECK(round1(optimal_q(low)) == doctest::Approx(74.4));

  // Price 50, cost 35, salvage 10 gives CR (50-35)/(50-10) = 0.375.
  const NewsvendorScenario mid = craft(50.0, 35.0, 10.0, 100.0, 20.0);
  CHECK(mid.cr == doctest::Approx(0.375));
  CHECK(round1(optimal_q(mid)) == doctest::Approx(93.6));

  // A balanced ratio orders exactly the mean.
  const NewsvendorScenario even = craft(40.0, 25.0, 10.0, 100.0, 20.0);
  CHECK(even.cr == doctest::Approx(0.5));
  CHECK(optimal_q(even) == doctest::Approx(100.0));

  // The 0.9 mirror of the first point.
  const NewsvendorScenario high = craft(100.0, 10.0, 0.0, 100.0, 20.0);
  CHECK(high.cr == doctest::Approx(0.9));
  CHECK(round1(optimal_q(high)) == doctest::Approx(125.6));
}

TEST_CASE("closed form maximizes a Monte-Carlo profit sweep") {
  // Stratified draws make the empirical curve essentially exact, so the grid
  // argmax must land within half a grid step of the analytic optimum.
  for (const NewsvendorScenario& sc :
       {craft(50.0, 35.0, 10.0, 100.0, 20.0),
        craft(100.0, 90.0, 0.0, 100.0, 20.0),
        craft(80.0, 20.0, 8.0, 150.0, 35.0)}) {
    const ProfitCurve curve(sc, 200000);
    const double step = sc.sigma / 50.0;
    double best_q = sc.mu - 4.0 * sc.sigma, best_profit = -1e300;
    for (double q = sc.mu - 4.0 * sc.sigma; q <= sc.mu + 4.0 * sc.sigma;
         q += step) {
      const double profit = curve.at(q);
      if (profit > best_profit) {
        best_profit = profit;
        best_q = q;
      }
    }
    INFO("cr = ", sc.cr);
    CHECK(std::fabs(best_q - sc.q_opt) <= 0.5 * step + 1e-9);
    CHECK(curve.at(sc.q_opt) >= best_profit - 1e-6);
  }
}

TEST_CASE("scenario generator respects its documented ranges") {
  Rng rng(4242);
  for (int i = 0; i < 500; ++i) {
    const int level = 1 + static_cast<int>(rng.uniform_int(0, 3));
    NewsvendorScenario sc = generate_scenario(0.05, 0.95, level, rng);
    INFO("draw ", i, " level ", level);
    CHECK(sc.cr >= 0.05);
    CHECK(sc.cr <= 0.95);
    CHECK(sc.price >= 10.0);
    CHECK(sc.price <= 100.0);
    CHECK(sc.salvage >= 0.0);
    CHECK(sc.salvage <= 0.3 * sc.price);
    CHECK(sc.cost ==
          doctest::Approx(sc.price - sc.cr * (sc.price - sc.salvage)));
    CHECK(sc.mu >= 50.0);
    CHECK(sc.mu <= 200.0);
    CHECK(sc.sigma >= 10.0);
    CHECK(sc.sigma <= 50.0);
    CHECK(sc.q_opt >= 5.0 - 1e-9);
    CHECK(sc.q_opt == doctest::Approx(optimal_q(sc)));
    CHECK(sc.cr_bucket == cr_bucket_name(sc.cr));
    CHECK(sc.distractors.size() == (level == 3 ? 1u : 0u));
    CHECK(sc.percentiles.has_value() == (level == 4));
    if (sc.percentiles) {
      CHECK(sc.percentiles->p25 < sc.percentiles->p50);
      CHECK(sc.percentiles->p50 < sc.percentiles->p75);
      for (double p : {sc.percentiles->p25, sc.percentiles->p50,
                       sc.percentiles->p75}) {
        CHECK(std::fabs(p * 100.0 - std::round(p * 100.0)) < 1e-6);
      }
    }
  }

  // A zero-width range pins the ratio exactly.
  NewsvendorScenario pinned = generate_scenario(0.1, 0.1, 1, rng);
  CHECK(pinned.cr == 0.1);

  CHECK_THROWS_AS(generate_scenario(0.0, 0.5, 1, rng), DomainError);
  CHECK_THROWS_AS(generate_scenario(0.5, 1.0, 1, rng), DomainError);
  CHECK_THROWS_AS(generate_scenario(0.6, 0.4, 1, rng), DomainError);
  CHECK_THROWS_AS(generate_scenario(0.2, 0.8, 0, rng), DomainError);
  CHECK_THROWS_AS(generate_scenario(0.2, 0.8, 5, rng), DomainError);
}

TEST_CASE("prompts reveal exactly what each level allows") {
  Rng rng(99);
  for (int level = 1; level <= 4; ++level) {
    NewsvendorScenario sc = generate_scenario(0.3, 0.7, level, rng);
    const std::string prompt = render_prompt(sc);
    INFO("level ", level, "\n", prompt);
    CHECK(prompt.find("Price:") != std::string::npos);
    CHECK(prompt.find("Cost:") != std::string::npos);
    CHECK(prompt.find("Salvage:") != std::string::npos);
    CHECK(prompt.find("single number") != std::string::npos);
    // The decision-relevant ratio and the answer are never printed.
    CHECK(prompt.find("ritical") == std::string::npos);
    CHECK(prompt.find("q_opt") == std::string::npos);
    if (level == 4) {
      CHECK(prompt.find("Std") == std::string::npos);
      CHECK(prompt.find("Mean demand") == std::string::npos);
      CHECK(prompt.find("P25") != std::string::npos);
      CHECK(prompt.find("P50") != std::string::npos);
      CHECK(prompt.find("P75") != std::string::npos);
    } else {
      CHECK(prompt.find("Mean demand:") != std::string::npos);
      CHECK(prompt.find("Std:") != std::string::npos);
    }
    if (level == 3) {
      REQUIRE(sc.distractors.size() == 1);
      CHECK(prompt.find(sc.distractors[0]) != std::string::npos);
    }
  }
}

TEST_CASE("parameter recovery from percentiles") {
  const double p25 = 100.0 + 20.0 * inv_norm_cdf(0.25);
  const double p75 = 100.0 + 20.0 * inv_norm_cdf(0.75);
  const InferredParams got = infer_params_from_percentiles(p25, 100.0, p75);
  CHECK(got.mu_hat == doctest::Approx(100.0));
  // The rounded 1.35 divisor biases sigma high by under 0.1%.
  CHECK(std::fabs(got.sigma_hat / 20.0 - 1.0) < 1e-3);

  CHECK_THROWS_AS(infer_params_from_percentiles(5.0, 5.0, 6.0), DomainError);
  CHECK_THROWS_AS(infer_params_from_percentiles(5.0, 4.0, 6.0), DomainError);
  CHECK_THROWS_AS(infer_params_from_percentiles(9.0, 8.0, 7.0), DomainError);
}

TEST_CASE("in-distribution split composition") {
  const std::vector<NewsvendorScenario> ds = build_id_split(9);
  REQUIRE(ds.size() == 400);

  std::map<int, int> per_level;
  std::map<int, std::map<std::string, int>> buckets;
  std::set<std::string> ids;
  for (const NewsvendorScenario& sc : ds) {
    ++per_level[sc.level];
    ++buckets[sc.level][sc.cr_bucket];
    CHECK(sc.split == Split::kId);
    CHECK(sc.stage == 0);
    CHECK(ids.insert(sc.id).second);  // unique ids
    switch (sc.level) {
      case 1:
        CHECK(sc.cr >= 0.4);
        CHECK(sc.cr <= 0.6);
        break;
      case 2:
        CHECK(((sc.cr >= 0.05 && sc.cr < 0.2) || (sc.cr >= 0.8 && sc.cr <= 0.95)));
        break;
      case 3:
        CHECK(sc.cr >= 0.3);
        CHECK(sc.cr <= 0.7);
        break;
      default:
        CHECK(sc.cr >= 0.05);
        CHECK(sc.cr <= 0.95);
        break;
    }
  }
  for (int level = 1; level <= 4; ++level) CHECK(per_level[level] == 100);

  // Bucket balance: neutral-only L1; 50/50 extremes L2; thirds L3; 20x5 L4.
  CHECK(buckets[1]["neutral"] == 100);
  CHECK(buckets[2]["very_low"] == 50);
  CHECK(buckets[2]["very_high"] == 50);
  for (const char* name : {"low", "neutral", "high"}) {
    CHECK(buckets[3][name] >= 33);
    CHECK(buckets[3][name] <= 34);
  }
  for (const char* name : {"very_low", "low", "neutral", "high", "very_high"}) {
    CHECK(buckets[4][name] == 20);
  }

  const std::map<int, CrRange> ranges = realized_cr_ranges(ds);
  REQUIRE(ranges.size() == 4);
  CHECK(ranges.at(1).lo >= 0.4);
  CHECK(ranges.at(1).hi <= 0.6);
  CHECK(ranges.at(4).lo >= 0.05);
  CHECK(ranges.at(4).hi <= 0.95);
}

TEST_CASE("out-of-distribution split composition") {
  const std::vector<NewsvendorScenario> ds = build_ood_split(9);
  REQUIRE(ds.size() == 200);
  std::map<int, int> per_level;
  for (const NewsvendorScenario& sc : ds) {
    ++per_level[sc.level];
    CHECK(sc.split == Split::kOod);
    CHECK(sc.cr >= 0.05);
    CHECK(sc.cr <= 0.95);
    if (sc.level == 3) {
      // Outside the interior of the in-distribution [0.3, 0.7] window.
      CHECK((sc.cr < 0.3 || sc.cr >= 0.7));
    }
  }
  CHECK(per_level[3] == 100);
  CHECK(per_level[4] == 100);
}

TEST_CASE("training curriculum staging") {
  const std::vector<NewsvendorScenario> ds = build_curriculum(9);
  REQUIRE(ds.size() == 900);
  std::map<int, int> per_stage;
  int pinned_low = 0, pinned_high = 0;
  for (const NewsvendorScenario& sc : ds) {
    ++per_stage[sc.stage];
    CHECK(sc.split == Split::kTrain);
    CHECK(sc.level == 1);  // curriculum uses the clean prompt everywhere
    CHECK(sc.id.rfind("train_s", 0) == 0);
    switch (sc.stage) {
      case 1:
        CHECK((sc.cr == 0.1 || sc.cr == 0.9));
        pinned_low += sc.cr == 0.1;
        pinned_high += sc.cr == 0.9;
        break;
      case 2:
        CHECK(((sc.cr >= 0.15 && sc.cr <= 0.25) || (sc.cr >= 0.75 && sc.cr <= 0.85)));
        break;
      default:
        CHECK(sc.stage == 3);
        CHECK(sc.cr >= 0.2);
        CHECK(sc.cr <= 0.8);
        break;
    }
  }
  CHECK(per_stage[1] == 200);
  CHECK(per_stage[2] == 300);
  CHECK(per_stage[3] == 400);
  CHECK(pinned_low == 100);
  CHECK(pinned_high == 100);
}

TEST_CASE("datasets are deterministic in the seed") {
  const auto a = build_id_split(42);
  const auto b = build_id_split(42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(serialize_scenario(a[i]) == serialize_scenario(b[i]));
  }
  const auto c = build_id_split(43);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (serialize_scenario(a[i]) != serialize_scenario(c[i])) {
      any_difference = true;
      break;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("scenario files round-trip byte-identically") {
  const std::vector<NewsvendorScenario> ds = build_ood_split(5);
  const std::string path =
      (std::filesystem::temp_directory_path() / "orgym_nv_roundtrip.jsonl")
          .string();
  write_dataset_file(path, ds);
  const std::vector<NewsvendorScenario> back = read_dataset_file(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(serialize_scenario(back[i]) == serialize_scenario(ds[i]));
  }
  // Hidden evaluation-side fields survive the trip.
  CHECK(back[0].cr == ds[0].cr);
  CHECK(back[0].q_opt == ds[0].q_opt);
  CHECK(back[0].mu == ds[0].mu);
  CHECK(back[0].sigma == ds[0].sigma);
  CHECK(back[0].cr_bucket == ds[0].cr_bucket);

  CHECK_THROWS_AS(parse_scenario_text("{}"), ParseError);
  CHECK_THROWS_AS(parse_scenario_text("not json"), ParseError);
}

TEST_CASE("free-text answers parse to order quantities") {
  CHECK(parse_order_quantity("order 100 units") == 100.0);
  CHECK(parse_order_quantity("87.5.") == 87.5);
  CHECK(parse_order_quantity("Q = 95") == 95.0);
  CHECK(parse_order_quantity("+30") == 30.0);
  CHECK(parse_order_quantity(".5 units") == 0.5);
  CHECK(parse_order_quantity("about 1.2e2 units") == 120.0);
  CHECK(parse_order_quantity("-12") == std::nullopt);
  CHECK(parse_order_quantity("ship -4 units") == std::nullopt);
  CHECK(parse_order_quantity("I cannot decide") == std::nullopt);
  CHECK(parse_order_quantity("") == std::nullopt);
  CHECK(parse_order_quantity("inf units") == std::nullopt);

  const Decision d = parse_decision_text(
      R"({"scenario_id":"id_l1_000_abc123","response":"I'd order 120 units"})");
  CHECK(d.scenario_id == "id_l1_000_abc123");
  CHECK(d.q == 120.0);
  const Decision back = parse_decision_text(serialize_decision(d));
  CHECK(back.scenario_id == d.scenario_id);
  CHECK(back.raw_response == d.raw_response);
  CHECK(back.q == d.q);
}

TEST_CASE("optimal decisions show no pull-to-center") {
  std::vector<NewsvendorScenario> ds = build_id_split(7);
  const std::vector<NewsvendorScenario> ood = build_ood_split(7);
  ds.insert(ds.end(), ood.begin(), ood.end());

  std::vector<Decision> decisions;
  decisions.reserve(ds.size());
  for (const NewsvendorScenario& sc : ds) decisions.push_back(answer(sc.id, sc.q_opt));

  const BiasReport r = evaluate_bias(decisions, ds);
  CHECK(r.n_decisions == 600);
  CHECK(r.n_rational == 600);
  CHECK(r.n_id == 400);
  CHECK(r.n_ood == 200);
  CHECK(r.rationality == doctest::Approx(100.0));
  CHECK(r.bias_diff == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.id_bias == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.ood_bias == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.drift == doctest::Approx(0.0).epsilon(1e-6));
  for (const auto& [name, stat] : r.per_bucket) {
    INFO(name);
    if (stat.n > 0) CHECK(stat.mean_ratio == doctest::Approx(1.0));
  }
}

TEST_CASE("mean-anchored decisions pull toward the center") {
  std::vector<NewsvendorScenario> ds = build_id_split(7);
  const std::vector<NewsvendorScenario> ood = build_ood_split(7);
  ds.insert(ds.end(), ood.begin(), ood.end());

  std::vector<Decision> decisions;
  for (const NewsvendorScenario& sc : ds) decisions.push_back(answer(sc.id, sc.mu));

  const BiasReport r = evaluate_bias(decisions, ds);
  CHECK(r.rationality == doctest::Approx(100.0));
  // Ordering the mean over-orders when CR < 0.5 and under-orders when
  // CR > 0.5 — the signature anchoring pattern.
  CHECK(r.bias_diff > 0.0);
  CHECK(r.id_bias > 0.0);
  CHECK(r.ood_bias > 0.0);
  CHECK(r.per_bucket.at("very_low").mean_ratio > 1.0);
  CHECK(r.per_bucket.at("low").mean_ratio > 1.0);
  CHECK(r.per_bucket.at("high").mean_ratio < 1.0);
  CHECK(r.per_bucket.at("very_high").mean_ratio < 1.0);

  const std::string text = render_bias_report(r);
  CHECK(text.find("bias_diff") != std::string::npos);
  CHECK(text.find("very_low") != std::string::npos);
}

TEST_CASE("bias metric edge cases") {
  const std::vector<NewsvendorScenario> ds = {
      craft(100.0, 70.0, 0.0, 100.0, 20.0, "a"),   // CR 0.3
      craft(100.0, 50.0, 0.0, 100.0, 20.0, "b"),   // CR 0.5 — neither side
      craft(100.0, 30.0, 0.0, 100.0, 20.0, "c"),   // CR 0.7
  };

  SUBCASE("exact two-sided difference") {
    std::vector<Decision> decisions = {
        answer("a", ds[0].q_opt * 1.2),
        answer("b", ds[1].q_opt),
        answer("c", ds[2].q_opt * 0.8),
    };
    const BiasReport r = evaluate_bias(decisions, ds);
    CHECK(r.n_rational == 3);
    CHECK(r.bias_diff == doctest::Approx(40.0));
  }
  SUBCASE("an empty conditional side zeroes the difference") {
    const std::vector<Decision> only_low = {answer("a", 120.0)};
    CHECK(evaluate_bias(only_low, ds).bias_diff == 0.0);
    const std::vector<Decision> only_center = {answer("b", 100.0)};
    CHECK(evaluate_bias(only_center, ds).bias_diff == 0.0);
  }
  SUBCASE("irrational answers lower rationality and drop out of ratios") {
    Decision mute;
    mute.scenario_id = "a";
    mute.raw_response = "unable to answer";
    mute.q = parse_order_quantity(mute.raw_response);
    const std::vector<Decision> decisions = {mute, answer("c", 80.0)};
    const BiasReport r = evaluate_bias(decisions, ds);
    CHECK(r.n_decisions == 2);
    CHECK(r.n_rational == 1);
    CHECK(r.rationality == doctest::Approx(50.0));
  }
  SUBCASE("unknown ids and empty input are typed errors") {
    const std::vector<Decision> ghost = {answer("nope", 100.0)};
    CHECK_THROWS_AS(evaluate_bias(ghost, ds), ParseError);
    CHECK_THROWS_AS(evaluate_bias({}, ds), EmptyInputError);
  }

  // The report itself round-trips.
  const std::vector<Decision> decisions = {answer("a", 110.0), answer("c", 90.0)};
  const BiasReport r = evaluate_bias(decisions, ds);
  const BiasReport back = parse_bias_report(parse_json(serialize_bias_report(r), "bias report"));
  CHECK(serialize_bias_report(back) == serialize_bias_report(r));
}
