#include "orgym/newsvendor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <regex>
#include <utility>

#include "orgym/parallel.hpp"

namespace orgym {
namespace {

// "100" / "86.51" / "37.5": two decimals with trailing zeros trimmed, so the
// prompt shows round numbers as round numbers.
std::string fmt_qty(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string fmt_money(double v) { return "$" + fmt_qty(v); }

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string fmt_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Normal distribution helpers.

double norm_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double inv_norm_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("inverse normal CDF needs u in (0,1), got " +
                      fmt_number(u));
  }
  // Rational approximations on the central region and the two tails
  // (Acklam's coefficients), accurate to ~1.2e-9 on their own.
  static constexpr double a[6] = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[6] = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the erfc-based CDF pushes the error to the
  // 1e-15 region. At u = 0.5 the approximation and the residual are both
  // exactly zero, so the result is exactly 0.
  const double e = norm_cdf(x) - u;
  const double r =
      e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - r / (1.0 + 0.5 * x * r);
}

// ---------------------------------------------------------------------------
// Scenarios.

std::string to_string(Split s) {
  switch (s) {
    case Split::kId:
      return "id";
    case Split::kOod:
      return "ood";
    case Split::kTrain:
      return "train";
  }
  throw Error("unreachable split");
}

Split split_from_string(const std::string& s) {
  if (s == "id") return Split::kId;
  if (s == "ood") return Split::kOod;
  if (s == "train") return Split::kTrain;
  throw ParseError("unknown split '" + s + "'");
}

double optimal_q(const NewsvendorScenario& sc) {
  return sc.mu + sc.sigma * inv_norm_cdf(sc.cr);
}

std::string cr_bucket_name(double cr) {
  if (cr < 0.2) return "very_low";
  if (cr < 0.4) return "low";
  if (cr < 0.6) return "neutral";
  if (cr < 0.8) return "high";
  return "very_high";
}

InferredParams infer_params_from_percentiles(double p25, double p50,
                                             double p75) {
  if (!(p25 < p50 && p50 < p75)) {
    throw DomainError("percentiles must be strictly increasing, got (" +
                      fmt_number(p25) + ", " + fmt_number(p50) + ", " +
                      fmt_number(p75) + ")");
  }
  InferredParams out;
  out.mu_hat = p50;
  out.sigma_hat = (p75 - p25) / 1.35;
  return out;
}

namespace {

// One decision-irrelevant context line: plausible supply-chain noise that
// does not change the single-period optimal order.
std::string make_distractor(double price, Rng& rng) {
  switch (rng.index(5)) {
    case 0: {  // warehouse capacity: the model has no capacity constraint
      const long limit = 100 * static_cast<long>(3 + rng.index(8));
      return "Storage limit: " + std::to_string(limit) + " units";
    }
    case 1: {  // competitor pricing: single-firm decision
      const long v =
          std::max(1L, std::lround(price * rng.uniform(0.8, 1.2)));
      return "Competitor sells at $" + std::to_string(v);
    }
    case 2: {  // shelf life: single-period model
      static constexpr int kDays[] = {14, 30, 45, 60, 90};
      return "Product expires in " + std::to_string(kDays[rng.index(5)]) +
             " days";
    }
    case 3: {  // historical trend: already reflected in mu and sigma
      const long g = static_cast<long>(5 + rng.index(16));
      return "Sales grew " + std::to_string(g) + "% last year";
    }
    default:  // seasonal context: already in the demand parameters
      return "Holiday season approaching";
  }
}

}  // namespace

NewsvendorScenario generate_scenario(double cr_lo, double cr_hi, int level,
                                     Rng& rng) {
  if (!(cr_lo > 0.0 && cr_hi < 1.0 && cr_lo <= cr_hi)) {
    throw DomainError("critical-ratio range must satisfy 0 < lo <= hi < 1");
  }
  if (level < 1 || level > 4) {
    throw DomainError("scenario level must be 1..4, got " +
                      std::to_string(level));
  }
  NewsvendorScenario sc;
  sc.level = level;
  sc.cr = cr_lo == cr_hi ? cr_lo : rng.uniform(cr_lo, cr_hi);
  sc.price = rng.uniform(10.0, 100.0);
  sc.salvage = rng.uniform(0.0, 0.3 * sc.price);
  sc.cost = sc.price - sc.cr * (sc.price - sc.salvage);
  sc.mu = rng.uniform(50.0, 200.0);
  const double z = inv_norm_cdf(sc.cr);
  // For below-center ratios, cap sigma so the optimal order stays at or
  // above 5 units (never near zero / negative over the benchmark's CR
  // ranges). The cap never drops below the nominal minimum of 10 for any
  // mu >= 50 and CR >= 0.05.
  double sigma_hi = 50.0;
  if (z < 0.0) sigma_hi = std::clamp((sc.mu - 5.0) / -z, 10.0, 50.0);
  sc.sigma = rng.uniform(10.0, sigma_hi);
  sc.q_opt = sc.mu + sc.sigma * z;
  sc.cr_bucket = cr_bucket_name(sc.cr);
  if (level == 3) sc.distractors.push_back(make_distractor(sc.price, rng));
  if (level == 4) {
    Percentiles p;
    p.p25 = round2(sc.mu + sc.sigma * inv_norm_cdf(0.25));
    p.p50 = round2(sc.mu);
    p.p75 = round2(sc.mu + sc.sigma * inv_norm_cdf(0.75));
    sc.percentiles = p;
  }
  return sc;
}

std::string render_prompt(const NewsvendorScenario& sc) {
  std::string out;
  out +=
      "You order inventory for a single selling season. Unsold units are "
      "salvaged; unmet demand is lost.\n";
  out += "Price: " + fmt_money(sc.price) + ", Cost: " + fmt_money(sc.cost) +
         ", Salvage: " + fmt_money(sc.salvage) + "\n";
  for (const std::string& d : sc.distractors) out += d + "\n";
  if (sc.level == 4) {
    if (!sc.percentiles) {
      throw Error("level-4 scenario '" + sc.id + "' has no percentiles");
    }
    const Percentiles& p = *sc.percentiles;
    out += "Demand percentiles: P25 = " + fmt_qty(p.p25) +
           ", P50 = " + fmt_qty(p.p50) + ", P75 = " + fmt_qty(p.p75) + "\n";
  } else {
    out += "Mean demand: " + fmt_qty(sc.mu) + ", Std: " + fmt_qty(sc.sigma) +
           "\n";
  }
  out += "Demand is normally distributed.\n";
  out += "How many units do you order? Reply with a single number.";
  return out;
}

// ---------------------------------------------------------------------------
// Dataset builders.

namespace {

// Closed-open CR interval a scenario's ratio is drawn from; lo == hi pins
// the ratio exactly (curriculum stage 1).
struct CrSlice {
  double lo = 0.0;
  double hi = 0.0;
};

// Splits `n` draws over the histogram buckets touched by the union of
// `pieces`, as evenly as possible (every bucket count within +-1 of n/m).
// Returns one slice per scenario, in bucket order.
std::vector<CrSlice> bucket_plan(const std::vector<CrSlice>& pieces, int n) {
  static constexpr double kEdges[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::vector<CrSlice>> per_bucket(5);
  for (const CrSlice& piece : pieces) {
    if (piece.lo == piece.hi) {
      per_bucket[static_cast<std::size_t>(
                     std::distance(std::begin(kEdges) + 1,
                                   std::upper_bound(std::begin(kEdges) + 1,
                                                    std::end(kEdges) - 1,
                                                    piece.lo)))]
          .push_back(piece);
      continue;
    }
    for (std::size_t k = 0; k < 5; ++k) {
      const double lo = std::max(piece.lo, kEdges[k]);
      const double hi = std::min(piece.hi, kEdges[k + 1]);
      if (lo < hi) per_bucket[k].push_back({lo, hi});
    }
  }
  std::vector<std::size_t> touched;
  for (std::size_t k = 0; k < 5; ++k) {
    if (!per_bucket[k].empty()) touched.push_back(k);
  }
  if (touched.empty()) throw Error("empty critical-ratio plan");
  const int m = static_cast<int>(touched.size());
  std::vector<CrSlice> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < m; ++t) {
    int count = n / m + (t < n % m ? 1 : 0);
    const std::vector<CrSlice>& subs = per_bucket[touched[static_cast<std::size_t>(t)]];
    const int per_sub = count / static_cast<int>(subs.size());
    for (std::size_t s = 0; s < subs.size(); ++s) {
      const int c =
          per_sub + (static_cast<int>(s) < count % static_cast<int>(subs.size()) ? 1 : 0);
      for (int i = 0; i < c; ++i) out.push_back(subs[s]);
    }
  }
  return out;
}

struct SlotPlan {
  int level = 1;
  int stage = 0;
  CrSlice cr;
};

void append_level(std::vector<SlotPlan>& plan, int level,
                  const std::vector<CrSlice>& pieces, int n) {
  for (const CrSlice& s : bucket_plan(pieces, n)) {
    plan.push_back({level, 0, s});
  }
}

std::uint64_t split_ordinal(Split s) {
  switch (s) {
    case Split::kId:
      return 0;
    case Split::kOod:
      return 1;
    case Split::kTrain:
      return 2;
  }
  throw Error("unreachable split");
}

std::vector<NewsvendorScenario> materialize(Split split, std::uint64_t seed,
                                            const std::vector<SlotPlan>& plan) {
  std::vector<NewsvendorScenario> out(plan.size());
  std::vector<std::string> failures(plan.size());
  parallel_for(plan.size(), [&](std::size_t i) {
    try {
      const SlotPlan& sp = plan[i];
      Rng rng = substream(seed, "bias", split_ordinal(split),
                          static_cast<std::uint64_t>(sp.stage * 10 + sp.level),
                          static_cast<std::uint64_t>(i));
      NewsvendorScenario sc =
          generate_scenario(sp.cr.lo, sp.cr.hi, sp.level, rng);
      sc.split = split;
      sc.stage = sp.stage;
      char idx[16];
      std::snprintf(idx, sizeof(idx), "%03d", static_cast<int>(i));
      if (split == Split::kTrain) {
        sc.id = "train_s" + std::to_string(sp.stage) + "_" + idx + "_" +
                rng.hex(6);
      } else {
        sc.id = to_string(split) + "_l" + std::to_string(sp.level) + "_" +
                idx + "_" + rng.hex(6);
      }
      out[i] = std::move(sc);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (const std::string& f : failures) {
    if (!f.empty()) throw Error("scenario generation failed: " + f);
  }
  return out;
}

}  // namespace

std::vector<NewsvendorScenario> build_id_split(std::uint64_t seed) {
  std::vector<SlotPlan> plan;
  append_level(plan, 1, {{0.4, 0.6}}, 100);
  append_level(plan, 2, {{0.05, 0.2}, {0.8, 0.95}}, 100);
  append_level(plan, 3, {{0.3, 0.7}}, 100);
  append_level(plan, 4, {{0.05, 0.95}}, 100);
  return materialize(Split::kId, seed, plan);
}

std::vector<NewsvendorScenario> build_ood_split(std::uint64_t seed) {
  std::vector<SlotPlan> plan;
  append_level(plan, 3, {{0.05, 0.3}, {0.7, 0.95}}, 100);
  append_level(plan, 4, {{0.05, 0.95}}, 100);
  return materialize(Split::kOod, seed, plan);
}

std::vector<NewsvendorScenario> build_curriculum(std::uint64_t seed) {
  std::vector<SlotPlan> plan;
  auto append_stage = [&plan](int stage, const std::vector<CrSlice>& pieces,
                              int n) {
    // Even spread over the stage's pieces; no bucket balancing for training
    // emission (the stages already pin their CR windows).
    const int per = n / static_cast<int>(pieces.size());
    for (const CrSlice& piece : pieces) {
      for (int i = 0; i < per; ++i) plan.push_back({1, stage, piece});
    }
  };
  append_stage(1, {{0.1, 0.1}, {0.9, 0.9}}, 200);
  append_stage(2, {{0.15, 0.25}, {0.75, 0.85}}, 300);
  append_stage(3, {{0.2, 0.8}}, 400);
  return materialize(Split::kTrain, seed, plan);
}

std::map<int, CrRange> realized_cr_ranges(
    const std::vector<NewsvendorScenario>& scenarios) {
  std::map<int, CrRange> out;
  for (const NewsvendorScenario& sc : scenarios) {
    auto [it, fresh] = out.try_emplace(sc.level, CrRange{sc.cr, sc.cr});
    if (!fresh) {
      it->second.lo = std::min(it->second.lo, sc.cr);
      it->second.hi = std::max(it->second.hi, sc.cr);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

std::string serialize_scenario(const NewsvendorScenario& sc) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("id");
  w.value(sc.id);
  w.key("level");
  w.value(sc.level);
  w.key("split");
  w.value(to_string(sc.split));
  if (sc.stage > 0) {
    w.key("stage");
    w.value(sc.stage);
  }
  w.key("price");
  w.value(sc.price);
  w.key("cost");
  w.value(sc.cost);
  w.key("salvage");
  w.value(sc.salvage);
  if (sc.level <= 3) {
    w.key("mu");
    w.value(sc.mu);
    w.key("sigma");
    w.value(sc.sigma);
  }
  if (!sc.distractors.empty()) {
    w.key("distractors");
    w.begin_array();
    for (const std::string& d : sc.distractors) w.value(d);
    w.end_array();
  }
  if (sc.percentiles) {
    w.key("percentiles");
    w.begin_object();
    w.key("p25");
    w.value(sc.percentiles->p25);
    w.key("p50");
    w.value(sc.percentiles->p50);
    w.key("p75");
    w.value(sc.percentiles->p75);
    w.end_object();
  }
  w.key("prompt");
  w.value(render_prompt(sc));
  // Evaluation-side truth, never shown to the agent. For level 4 this is
  // also where the real demand parameters live.
  w.key("hidden");
  w.begin_object();
  w.key("cr");
  w.value(sc.cr);
  w.key("q_opt");
  w.value(sc.q_opt);
  w.key("cr_bucket");
  w.value(sc.cr_bucket);
  if (sc.level == 4) {
    w.key("mu");
    w.value(sc.mu);
    w.key("sigma");
    w.value(sc.sigma);
  }
  w.end_object();
  w.end_object();
  return w.str();
}

NewsvendorScenario parse_scenario(const Json& j) {
  try {
    NewsvendorScenario sc;
    sc.id = j.at("id").get<std::string>();
    sc.level = j.at("level").get<int>();
    if (sc.level < 1 || sc.level > 4) {
      throw ParseError("scenario level out of range");
    }
    sc.split = split_from_string(j.at("split").get<std::string>());
    sc.stage = j.value("stage", 0);
    sc.price = j.at("price").get<double>();
    sc.cost = j.at("cost").get<double>();
    sc.salvage = j.at("salvage").get<double>();
    const Json& hidden = j.at("hidden");
    sc.cr = hidden.at("cr").get<double>();
    sc.q_opt = hidden.at("q_opt").get<double>();
    sc.cr_bucket = hidden.value("cr_bucket", cr_bucket_name(sc.cr));
    if (sc.level == 4) {
      sc.mu = hidden.at("mu").get<double>();
      sc.sigma = hidden.at("sigma").get<double>();
    } else {
      sc.mu = j.at("mu").get<double>();
      sc.sigma = j.at("sigma").get<double>();
    }
    if (j.contains("distractors")) {
      for (const Json& d : j.at("distractors")) {
        sc.distractors.push_back(d.get<std::string>());
      }
    }
    if (j.contains("percentiles")) {
      const Json& p = j.at("percentiles");
      sc.percentiles = Percentiles{p.at("p25").get<double>(),
                                   p.at("p50").get<double>(),
                                   p.at("p75").get<double>()};
    }
    return sc;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad scenario record: ") + e.what());
  }
}

NewsvendorScenario parse_scenario_text(const std::string& line) {
  return parse_scenario(parse_json(line, "bias scenario"));
}

void write_dataset_file(const std::string& path,
                        const std::vector<NewsvendorScenario>& scenarios) {
  std::string out;
  for (const NewsvendorScenario& sc : scenarios) {
    out += serialize_scenario(sc);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<NewsvendorScenario> read_dataset_file(const std::string& path) {
  std::vector<NewsvendorScenario> out;
  for (const std::string& line : read_lines(path)) {
    if (!line.empty()) out.push_back(parse_scenario_text(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decisions and bias metrics.

std::optional<double> parse_order_quantity(const std::string& text) {
  static const std::regex kNumber(
      R"([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)");
  std::smatch m;
  if (!std::regex_search(text, m, kNumber)) return std::nullopt;
  const std::string tok = m.str();
  if (!tok.empty() && tok.front() == '-') return std::nullopt;
  try {
    const double v = std::stod(tok);
    if (!std::isfinite(v) || v < 0.0) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Decision parse_decision_text(const std::string& line) {
  const Json j = parse_json(line, "decision");
  try {
    Decision d;
    d.scenario_id = j.at("scenario_id").get<std::string>();
    d.raw_response = j.at("response").get<std::string>();
    d.q = parse_order_quantity(d.raw_response);
    return d;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad decision record: ") + e.what());
  }
}

std::vector<Decision> read_decisions_file(const std::string& path) {
  std::vector<Decision> out;
  for (const std::string& line : read_lines(path)) {
    if (!line.empty()) out.push_back(parse_decision_text(line));
  }
  return out;
}

std::string serialize_decision(const Decision& d) {
  JsonWriter w;
  w.begin_object();
  w.key("scenario_id");
  w.value(d.scenario_id);
  w.key("response");
  w.value(d.raw_response);
  w.end_object();
  return w.str();
}

namespace {

struct RunningMean {
  double sum = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
};

// |E[high] - E[low]| in percent; 0 when either side is empty.
double side_diff(const RunningMean& high, const RunningMean& low) {
  if (high.n == 0 || low.n == 0) return 0.0;
  return 100.0 * std::fabs(high.mean() - low.mean());
}

}  // namespace

BiasReport evaluate_bias(const std::vector<Decision>& decisions,
                         const std::vector<NewsvendorScenario>& scenarios) {
  if (decisions.empty()) throw EmptyInputError("no decisions to evaluate");
  std::map<std::string, const NewsvendorScenario*> by_id;
  for (const NewsvendorScenario& sc : scenarios) by_id[sc.id] = &sc;

  BiasReport r;
  r.n_decisions = static_cast<int>(decisions.size());
  RunningMean hi_all, lo_all, hi_id, lo_id, hi_ood, lo_ood;
  std::map<std::string, RunningMean> buckets;
  for (const Decision& d : decisions) {
    const auto it = by_id.find(d.scenario_id);
    if (it == by_id.end()) {
      throw ParseError("decision references unknown scenario '" +
                       d.scenario_id + "'");
    }
    if (!d.q) continue;
    const NewsvendorScenario& sc = *it->second;
    if (!(sc.q_opt > 0.0)) {
      throw Error("scenario '" + sc.id +
                  "' has a non-positive optimal quantity");
    }
    ++r.n_rational;
    const double ratio = *d.q / sc.q_opt;
    buckets[sc.cr_bucket.empty() ? cr_bucket_name(sc.cr) : sc.cr_bucket].add(
        ratio);
    if (sc.split == Split::kId) ++r.n_id;
    if (sc.split == Split::kOod) ++r.n_ood;
    if (sc.cr > 0.5) {
      hi_all.add(ratio);
      if (sc.split == Split::kId) hi_id.add(ratio);
      if (sc.split == Split::kOod) hi_ood.add(ratio);
    } else if (sc.cr < 0.5) {
      lo_all.add(ratio);
      if (sc.split == Split::kId) lo_id.add(ratio);
      if (sc.split == Split::kOod) lo_ood.add(ratio);
    }
  }
  r.rationality = 100.0 * r.n_rational / r.n_decisions;
  r.bias_diff = side_diff(hi_all, lo_all);
  r.id_bias = side_diff(hi_id, lo_id);
  r.ood_bias = side_diff(hi_ood, lo_ood);
  r.drift = r.ood_bias - r.id_bias;
  for (const char* name :
       {"very_low", "low", "neutral", "high", "very_high"}) {
    const auto bit = buckets.find(name);
    BucketStat stat;
    if (bit != buckets.end()) {
      stat.mean_ratio = bit->second.mean();
      stat.n = bit->second.n;
    }
    r.per_bucket[name] = stat;
  }
  return r;
}

std::string serialize_bias_report(const BiasReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("n_decisions");
  w.value(r.n_decisions);
  w.key("n_rational");
  w.value(r.n_rational);
  w.key("n_id");
  w.value(r.n_id);
  w.key("n_ood");
  w.value(r.n_ood);
  w.key("rationality");
  w.value(r.rationality);
  w.key("bias_diff");
  w.value(r.bias_diff);
  w.key("id_bias");
  w.value(r.id_bias);
  w.key("ood_bias");
  w.value(r.ood_bias);
  w.key("drift");
  w.value(r.drift);
  w.key("per_bucket");
  w.begin_object();
  for (const auto& [name, stat] : r.per_bucket) {
    w.key(name);
    w.begin_object();
    w.key("mean_ratio");
    w.value(stat.mean_ratio);
    w.key("n");
    w.value(stat.n);
    w.end_object();
  }
  w.end_object();
  w.end_object();
  return w.str();
}

BiasReport parse_bias_report(const Json& j) {
  try {
    BiasReport r;
    r.n_decisions = j.at("n_decisions").get<int>();
    r.n_rational = j.at("n_rational").get<int>();
    r.n_id = j.at("n_id").get<int>();
    r.n_ood = j.at("n_ood").get<int>();
    r.rationality = j.at("rationality").get<double>();
    r.bias_diff = j.at("bias_diff").get<double>();
    r.id_bias = j.at("id_bias").get<double>();
    r.ood_bias = j.at("ood_bias").get<double>();
    r.drift = j.at("drift").get<double>();
    for (const auto& [name, stat] : j.at("per_bucket").items()) {
      r.per_bucket[name] = BucketStat{stat.at("mean_ratio").get<double>(),
                                      stat.at("n").get<int>()};
    }
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("bad bias report: ") + e.what());
  }
}

std::string render_bias_report(const BiasReport& r) {
  std::string out;
  out += "decisions " + std::to_string(r.n_decisions) + "  rational " +
         fmt_pct(r.rationality) + "\n";
  out += "bias_diff " + fmt_pct(r.bias_diff) + "  id " + fmt_pct(r.id_bias) +
         "  ood " + fmt_pct(r.ood_bias) + "  drift " + fmt_pct(r.drift) +
         "\n";
  char line[96];
  std::snprintf(line, sizeof(line), "%-12s %12s %8s\n", "bucket", "mean Q/Q*",
                "n");
  out += line;
  for (const char* name :
       {"very_low", "low", "neutral", "high", "very_high"}) {
    const auto it = r.per_bucket.find(name);
    const BucketStat stat = it != r.per_bucket.end() ? it->second
                                                     : BucketStat{};
    std::snprintf(line, sizeof(line), "%-12s %12.4f %8d\n", name,
                  stat.mean_ratio, stat.n);
    out += line;
  }
  return out;
}

}  // namespace orgym
