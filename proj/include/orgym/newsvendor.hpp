// Newsvendor decision benchmark: scenario generation with controlled
// critical ratios, a four-level prompt curriculum, a closed-form oracle, and
// pull-to-center bias metrics over recorded order decisions.
//
// The unit under test here is an *agent's* single-shot order quantity. The
// library side is purely analytical: every scenario carries its exact optimal
// order Q* = mu + sigma * Phi^-1(CR), so evaluation needs no solver.
//
// Levels:
//   1  clean prompt, neutral critical ratios (CR in [0.4, 0.6])
//   2  clean prompt, extreme critical ratios (CR in [0.05,0.2) u (0.8,0.95])
//   3  one decision-irrelevant distractor line injected into the prompt
//   4  demand given only as (P25, P50, P75) percentiles; mu/sigma hidden
//
// Splits: "id" (100 per level, CR-bucket balanced within each level),
// "ood" (L3 with out-of-range extreme CR + L4 over the full range, 100 each),
// and "train" (three-stage curriculum: 200 extreme / 300 boundary / 400 full).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orgym/errors.hpp"
#include "orgym/jsonio.hpp"
#include "orgym/rng.hpp"

namespace orgym {

// --------------------------------------------------------------------------
// Normal distribution helpers.

// Standard normal CDF via the complementary error function.
double norm_cdf(double x);

// Standard normal inverse CDF. Acklam-style rational approximation followed
// by one Halley refinement against norm_cdf; |norm_cdf(result) - u| < 1e-9
// over the open interval. Throws DomainError for u outside (0, 1).
// inv_norm_cdf(0.5) is exactly 0.
double inv_norm_cdf(double u);

// --------------------------------------------------------------------------
// Scenarios.

enum class Split { kId, kOod, kTrain };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct Percentiles {
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
};

// One single-period inventory decision problem. The agent-facing text is
// produced by render_prompt and never reveals cr or q_opt; for level 4 the
// prompt shows only the percentiles, while mu/sigma stay evaluation-side.
struct NewsvendorScenario {
  std::string id;
  int level = 1;       // 1..4
  Split split = Split::kId;
  int stage = 0;       // curriculum stage 1..3; 0 outside the train split
  double price = 0.0;  // unit sale price p
  double cost = 0.0;   // unit cost c, derived from the target critical ratio
  double salvage = 0.0;       // per-unit salvage value s for leftovers
  double mu = 0.0;            // true demand mean
  double sigma = 0.0;         // true demand standard deviation
  double cr = 0.0;            // critical ratio (p - c) / (p - s)
  double q_opt = 0.0;         // optimal order quantity mu + sigma * z(cr)
  std::string cr_bucket;      // very_low / low / neutral / high / very_high
  std::vector<std::string> distractors;  // level 3: exactly one line
  std::optional<Percentiles> percentiles;  // level 4 only, rounded to 2 dp
};

// Closed-form optimal order quantity from the scenario's true parameters.
double optimal_q(const NewsvendorScenario& sc);

// Histogram bucket for a critical ratio: very_low (<0.2), low [0.2,0.4),
// neutral [0.4,0.6), high [0.6,0.8), very_high (>=0.8).
std::string cr_bucket_name(double cr);

// Parameter recovery for censored (level 4) scenarios: mu_hat = P50,
// sigma_hat = (P75 - P25) / 1.35. The 1.35 divisor is the conventional
// rounded interquartile range of the standard normal (exact value 1.34898),
// which biases sigma_hat high by under 0.1%. Throws DomainError unless
// p25 < p50 < p75.
struct InferredParams {
  double mu_hat = 0.0;
  double sigma_hat = 0.0;
};
InferredParams infer_params_from_percentiles(double p25, double p50,
                                             double p75);

// Draws one scenario with CR ~ Uniform(cr_lo, cr_hi), p ~ U(10,100),
// s ~ U(0, 0.3p), c = p - CR*(p - s), mu ~ U(50,200), sigma ~ U(10,50).
// When z(CR) < 0 the sigma range is clamped so that q_opt >= 5 (keeps every
// optimal order positive; documented deviation from the unclamped ranges).
// Level 3 appends exactly one distractor; level 4 computes percentiles from
// the true parameters and rounds them to two decimals (what the prompt
// shows is exactly what is stored). id/split/stage are left for the caller.
NewsvendorScenario generate_scenario(double cr_lo, double cr_hi, int level,
                                     Rng& rng);

// Deterministic prompt text. Levels 1-3 state price/cost/salvage and
// mean/std; level 3 interleaves its distractor among the parameter lines;
// level 4 replaces the demand line with percentiles and never contains the
// token "Std". No level reveals cr or q_opt.
std::string render_prompt(const NewsvendorScenario& sc);

// --------------------------------------------------------------------------
// Dataset builders. All are deterministic in `seed` (byte-identical files)
// and generate scenarios in parallel with one RNG sub-stream per slot.

// 400 scenarios: 100 per level. Within each level the CR draws are balanced
// across the histogram buckets its CR range touches (counts within +-1 of
// uniform). Level CR ranges: L1 [0.4,0.6]; L2 [0.05,0.2) u (0.8,0.95];
// L3 [0.3,0.7]; L4 [0.05,0.95].
std::vector<NewsvendorScenario> build_id_split(std::uint64_t seed);

// 200 scenarios, levels 3 and 4 only (100 each). L3 uses extreme ratios
// [0.05,0.3) u (0.7,0.95] (outside the in-distribution L3 range); L4 spans
// the full [0.05,0.95]. Bucket-balanced the same way as the ID split.
std::vector<NewsvendorScenario> build_ood_split(std::uint64_t seed);

// 900 clean (level-1 prompt) training scenarios in three stages:
//   stage 1: 200 at exactly CR = 0.1 or 0.9 (100 each)
//   stage 2: 300 over [0.15,0.25] u [0.75,0.85] (150 each half)
//   stage 3: 400 over [0.2,0.8]
std::vector<NewsvendorScenario> build_curriculum(std::uint64_t seed);

// Realized CR range per level, for dataset metadata.
struct CrRange {
  double lo = 0.0;
  double hi = 0.0;
};
std::map<int, CrRange> realized_cr_ranges(
    const std::vector<NewsvendorScenario>& scenarios);

// --------------------------------------------------------------------------
// Serialization. One JSON object per scenario; the "hidden" sub-object holds
// everything the prompt must not reveal (cr, q_opt, bucket, and for level 4
// the true mu/sigma). The rendered prompt is embedded so a dataset file is
// directly consumable by an external agent.

std::string serialize_scenario(const NewsvendorScenario& sc);
NewsvendorScenario parse_scenario(const Json& j);
NewsvendorScenario parse_scenario_text(const std::string& line);

void write_dataset_file(const std::string& path,
                        const std::vector<NewsvendorScenario>& scenarios);
std::vector<NewsvendorScenario> read_dataset_file(const std::string& path);

// --------------------------------------------------------------------------
// Decisions and bias metrics.

// One recorded answer to a scenario. `q` is present iff the response parses
// to a usable order quantity (see parse_order_quantity).
struct Decision {
  std::string scenario_id;
  std::string raw_response;
  std::optional<double> q;
};

// Extracts the first numeric token of a free-text response and returns it
// when it is finite and nonnegative; nullopt otherwise (including responses
// whose first number carries a minus sign).
std::optional<double> parse_order_quantity(const std::string& text);

// Decisions file: one {"scenario_id": ..., "response": ...} object per line.
Decision parse_decision_text(const std::string& line);
std::vector<Decision> read_decisions_file(const std::string& path);
std::string serialize_decision(const Decision& d);

struct BucketStat {
  double mean_ratio = 0.0;  // mean of q / q_opt over rational decisions
  int n = 0;
};

// Pull-to-center report. All percentages are 0..100. bias_diff is
// |E[Q/Q* | CR > 0.5] - E[Q/Q* | CR < 0.5]| * 100 over rational decisions
// only (CR exactly 0.5 contributes to neither side); id_bias/ood_bias apply
// the same formula restricted to one split, and drift = ood_bias - id_bias.
// A diff is 0 whenever either of its conditional sides is empty.
struct BiasReport {
  double rationality = 0.0;
  double bias_diff = 0.0;
  double id_bias = 0.0;
  double ood_bias = 0.0;
  double drift = 0.0;
  std::map<std::string, BucketStat> per_bucket;
  int n_decisions = 0;
  int n_rational = 0;
  int n_id = 0;   // rational decisions on id-split scenarios
  int n_ood = 0;  // rational decisions on ood-split scenarios
};

// Scores decisions against the dataset they were made on. Every decision
// must reference a known scenario id (ParseError otherwise); an empty
// decision list is an EmptyInputError.
BiasReport evaluate_bias(const std::vector<Decision>& decisions,
                         const std::vector<NewsvendorScenario>& scenarios);

std::string serialize_bias_report(const BiasReport& r);
BiasReport parse_bias_report(const Json& j);

// Small fixed-width text block for terminal output.
std::string render_bias_report(const BiasReport& r);

}  // namespace orgym
