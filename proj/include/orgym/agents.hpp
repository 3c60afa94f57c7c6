// Debugging agents: the scripted oracle ceiling, a slack-guided greedy
// baseline, a weighted-random floor, and a subprocess bridge that lets any
// external program play over line-delimited JSON on stdio.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "orgym/env.hpp"
#include "orgym/rng.hpp"
#include "orgym/saboteur.hpp"

namespace orgym {

// One agent instance plays one episode; the harness constructs a fresh one
// per (instance, attempt).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual Action act(const EpisodeState& s) = 0;
};

// Builds an agent for one episode. `seed` is the attempt's private RNG
// stream; deterministic agents may ignore it.
using AgentFactory =
    std::function<std::unique_ptr<Agent>(const BenchmarkInstance& inst, std::uint64_t seed)>;

// Scripted ceiling: first GET_IIS carrying the full ground-truth conflict as
// its diagnosis, then the labeled fix edits (cascade fix included when the
// instance has one), then SUBMIT. Always ends OPTIMAL on a validated
// instance.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(const BenchmarkInstance& inst);
  Action act(const EpisodeState& s) override;

 private:
  std::vector<ModelEdit> plan_;
  std::vector<std::string> diagnosis_;
  std::size_t next_ = 0;
  bool sent_diagnosis_ = false;
};

// Slack-guided baseline: reads the conflict and slack diagnostics, then
// cycles through conflict members relaxing each by 10% of its right-hand
// side (at least 1.0) in the loosening direction; SUBMITs as soon as the
// model solves OPTIMAL, and gives up (SUBMIT) on UNBOUNDED/ERROR.
class GreedyIisAgent : public Agent {
 public:
  GreedyIisAgent() = default;
  Action act(const EpisodeState& s) override;

 private:
  int relax_count_ = 0;
};

// Weighted-random floor: mostly random repairs on random constraints with
// random deltas, submitting early and often. Seeded, so runs reproduce.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed);
  Action act(const EpisodeState& s) override;

 private:
  Rng rng_;
};

// Subprocess bridge. Spawns `cmd` via /bin/sh once per episode; each state
// is written to the child's stdin as one JSON line
//   {"schema_version":1, "episode_id":..., "sequence_no":n,
//    "state":{...}, "allowed_actions":[...]}
// and one action JSON line is read back from its stdout. A reply that does
// not arrive within `timeout_seconds` raises TimeoutError; malformed replies
// raise ProtocolError; both are recorded by the harness as a failed attempt.
class ExternalAgent : public Agent {
 public:
  ExternalAgent(std::string cmd, std::string episode_id, double timeout_seconds = 120.0);
  ~ExternalAgent() override;
  ExternalAgent(const ExternalAgent&) = delete;
  ExternalAgent& operator=(const ExternalAgent&) = delete;

  Action act(const EpisodeState& s) override;

 private:
  void shutdown();

  std::string episode_id_;
  double timeout_seconds_;
  int pid_ = -1;
  int to_child_ = -1;    // write end of the child's stdin
  int from_child_ = -1;  // read end of the child's stdout
  std::string buffer_;   // bytes read but not yet consumed as a line
  int sequence_no_ = 0;
};

// Resolves an agent spec to a factory: "oracle", "greedy", "random", or
// "cmd:<shell command>". Throws ParseError on anything else. The factory
// derives per-episode seeds/ids from the instance and attempt seed.
AgentFactory make_agent_factory(const std::string& spec, double external_timeout_seconds = 120.0);

}  // namespace orgym
