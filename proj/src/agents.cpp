#include "orgym/agents.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "orgym/errors.hpp"

namespace orgym {

// ---- Oracle -------------------------------------------------------------

OracleAgent::OracleAgent(const BenchmarkInstance& inst) {
  plan_ = inst.ground_truth.fix;
  if (inst.cascade) {
    plan_.insert(plan_.end(), inst.cascade->fix.begin(), inst.cascade->fix.end());
  }
  // Diagnose the full conflict: DA scores the episode's diagnosis union
  // against every ground-truth conflict member, bounds included.
  diagnosis_ = inst.ground_truth.iis_gt.members;
}

namespace {

// Converts a ground-truth model edit into the equivalent env action against
// the current code. Sense flips become REWRITEs (the action space has no
// flip); absolute rhs/bound assignments become the matching RELAX delta.
Action edit_to_action(const ModelEdit& e, const LpModel& code) {
  switch (e.kind) {
    case ModelEdit::Kind::kRelax:
      return Action::relax(e.target, e.value);
    case ModelEdit::Kind::kDrop:
      return Action::drop(e.target);
    case ModelEdit::Kind::kRewrite: {
      Constraint replacement = *e.constraint;
      replacement.name = e.target;
      return Action::rewrite_row(e.target, std::move(replacement));
    }
    case ModelEdit::Kind::kFlipSense: {
      const Constraint* c = code.find_constraint(e.target);
      if (c == nullptr) throw InvalidModelError("flip target not found: " + e.target);
      Constraint flipped = *c;
      flipped.sense = flipped.sense == Sense::LE ? Sense::GE : Sense::LE;
      return Action::rewrite_row(e.target, std::move(flipped));
    }
    case ModelEdit::Kind::kSetRhs: {
      const Constraint* c = code.find_constraint(e.target);
      if (c != nullptr) return Action::relax(e.target, e.value - c->rhs);
      bool lower = true;
      const auto var = split_bound_name(e.target, lower);
      if (var) {
        const Variable* v = code.find_variable(*var);
        if (v != nullptr) {
          return Action::relax(e.target, e.value - (lower ? v->lower : v->upper));
        }
      }
      throw InvalidModelError("set_rhs target not found: " + e.target);
    }
    case ModelEdit::Kind::kSetBound: {
      const Variable* v = code.find_variable(e.target);
      if (v == nullptr) throw InvalidModelError("bound target not found: " + e.target);
      const double current = e.lower_bound ? v->lower : v->upper;
      return Action::relax(bound_constraint_name(e.target, e.lower_bound),
                           e.value - current);
    }
    case ModelEdit::Kind::kAddConstraint:
      // No env action adds constraints; the ground-truth fixes never need one.
      throw InvalidModelError("add_constraint has no action equivalent");
  }
  throw InvalidModelError("unhandled edit kind");
}

}  // namespace

Action OracleAgent::act(const EpisodeState& s) {
  if (!sent_diagnosis_) {
    sent_diagnosis_ = true;
    Action a = Action::get_iis();
    a.diagnosis = diagnosis_;
    return a;
  }
  if (next_ < plan_.size()) {
    return edit_to_action(plan_[next_++], s.code);
  }
  return Action::submit();
}

// ---- Greedy -------------------------------------------------------------

Action GreedyIisAgent::act(const EpisodeState& s) {
  if (s.status == SolveStatus::OPTIMAL) return Action::submit();
  if (s.status != SolveStatus::INFEASIBLE) return Action::submit();  // give up
  if (s.iis_log.empty()) return Action::get_iis();
  if (!s.slack_values) return Action::check_slack();

  // Members ordered most-violated first (signed slack ascending; negative
  // means violated). Cycle so a stubborn member does not absorb every step.
  std::vector<std::string> members = s.iis_log;
  std::stable_sort(members.begin(), members.end(),
                   [&](const std::string& a, const std::string& b) {
                     const auto& sv = *s.slack_values;
                     const double sa = sv.count(a) ? sv.at(a) : 0.0;
                     const double sb = sv.count(b) ? sv.at(b) : 0.0;
                     return sa < sb;
                   });
  const std::string& target =
      members[static_cast<std::size_t>(relax_count_) % members.size()];
  ++relax_count_;

  // Loosening direction and current magnitude depend on what the name is.
  double rhs = 0.0;
  Sense sense = Sense::LE;
  bool lower = true;
  if (const Constraint* c = s.code.find_constraint(target)) {
    rhs = c->rhs;
    sense = c->sense;
  } else if (const auto var = split_bound_name(target, lower); var) {
    const Variable* v = s.code.find_variable(*var);
    if (v != nullptr) {
      rhs = lower ? v->lower : v->upper;
      sense = lower ? Sense::GE : Sense::LE;
    }
  }
  const double step = std::max(0.1 * std::fabs(rhs), 1.0);
  double delta = 0.0;
  switch (sense) {
    case Sense::GE: delta = -step; break;
    case Sense::LE: delta = +step; break;
    // Equalities carry no loosening direction; shrink the rhs magnitude.
    case Sense::EQ: delta = rhs > 0.0 ? -step : +step; break;
  }
  return Action::relax(target, delta);
}

// ---- Random -------------------------------------------------------------

RandomAgent::RandomAgent(std::uint64_t seed) : rng_(seed) {}

Action RandomAgent::act(const EpisodeState& s) {
  const double roll = rng_.uniform();
  if (s.code.constraints.empty() || roll < 0.15) return Action::get_iis();
  if (roll < 0.25) return Action::check_slack();
  if (roll < 0.55) {
    const Constraint& c =
        s.code.constraints[rng_.index(s.code.constraints.size())];
    const double delta = rng_.uniform(-1.0, 1.0) * std::max(1.0, 0.2 * std::fabs(c.rhs));
    return Action::relax(c.name, delta);
  }
  if (roll < 0.65) {
    const Constraint& c =
        s.code.constraints[rng_.index(s.code.constraints.size())];
    return Action::drop(c.name);
  }
  if (roll < 0.72) return Action::restart();
  return Action::submit();
}

// ---- External subprocess bridge ------------------------------------------

ExternalAgent::ExternalAgent(std::string cmd, std::string episode_id,
                             double timeout_seconds)
    : episode_id_(std::move(episode_id)), timeout_seconds_(timeout_seconds) {
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  if (pipe(in_pipe) != 0) throw SpawnError("pipe() failed: " + std::string(strerror(errno)));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw SpawnError("pipe() failed: " + std::string(strerror(errno)));
  }
  const int pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw SpawnError("fork() failed: " + std::string(strerror(errno)));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);  // exec failed
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  close(in_pipe[0]);
  close(out_pipe[1]);
}

ExternalAgent::~ExternalAgent() { shutdown(); }

void ExternalAgent::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    kill(pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

Action ExternalAgent::act(const EpisodeState& s) {
  if (pid_ <= 0) throw ProtocolError("agent process is not running");

  JsonWriter w;
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("episode_id");
  w.value(episode_id_);
  w.key("sequence_no");
  w.value(sequence_no_++);
  w.key("state");
  write_state(w, s);
  w.key("allowed_actions");
  w.begin_array();
  for (ActionKind k : {ActionKind::GET_IIS, ActionKind::CHECK_SLACK,
                       ActionKind::CHECK_BOUND, ActionKind::RELAX, ActionKind::DROP,
                       ActionKind::REWRITE, ActionKind::SUBMIT, ActionKind::RESTART}) {
    w.value(to_string(k));
  }
  w.end_array();
  w.end_object();
  std::string line = w.str();
  line += '\n';

  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("agent stdin closed: " + std::string(strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }

  // Read one reply line, honoring the per-message deadline.
  const auto deadline_ms = static_cast<int>(timeout_seconds_ * 1000.0);
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      const std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      try {
        return parse_action(parse_json(reply, "agent action"));
      } catch (const ParseError& e) {
        throw ProtocolError("agent reply is not a valid action: " + std::string(e.what()));
      }
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = poll(&pfd, 1, deadline_ms);
    if (ready == 0) {
      throw TimeoutError("agent did not reply within " +
                         std::to_string(timeout_seconds_) + " s");
    }
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("poll() on agent stdout failed: " + std::string(strerror(errno)));
    }
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("read() from agent failed: " + std::string(strerror(errno)));
    }
    if (n == 0) throw ProtocolError("agent closed its stdout before replying");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

// ---- Factory --------------------------------------------------------------

AgentFactory make_agent_factory(const std::string& spec,
                                double external_timeout_seconds) {
  if (spec == "oracle") {
    return [](const BenchmarkInstance& inst, std::uint64_t) {
      return std::make_unique<OracleAgent>(inst);
    };
  }
  if (spec == "greedy") {
    return [](const BenchmarkInstance&, std::uint64_t) {
      return std::make_unique<GreedyIisAgent>();
    };
  }
  if (spec == "random") {
    return [](const BenchmarkInstance&, std::uint64_t seed) {
      return std::make_unique<RandomAgent>(seed);
    };
  }
  if (spec.rfind("cmd:", 0) == 0) {
    const std::string cmd = spec.substr(4);
    if (cmd.empty()) throw ParseError("empty external agent command");
    return [cmd, external_timeout_seconds](const BenchmarkInstance& inst,
                                           std::uint64_t seed) {
      const std::string episode_id = inst.id + "#" + std::to_string(seed);
      return std::make_unique<ExternalAgent>(cmd, episode_id, external_timeout_seconds);
    };
  }
  throw ParseError("unknown agent spec '" + spec +
                   "' (expected oracle|greedy|random|cmd:<command>)");
}

}  // namespace orgym
