#include "orgym/iis.hpp"

#include <algorithm>

#include "orgym/errors.hpp"

namespace orgym {

bool IisReport::contains(const std::string& name) const {
  return std::find(members.begin(), members.end(), name) != members.end();
}

std::vector<std::string> IisReport::explicit_constraint_members() const {
  std::vector<std::string> out;
  for (const std::string& m : members) {
    bool lower = false;
    if (!split_bound_name(m, lower)) out.push_back(m);
  }
  return out;
}

void IisReport::write(JsonWriter& w) const {
  w.begin_object();
  w.key("members");
  w.begin_array();
  for (const std::string& m : members) w.value(m);
  w.end_array();
  w.key("size");
  w.value(size);
  w.end_object();
}

IisReport IisReport::parse(const Json& j) {
  IisReport r;
  if (!j.is_object() || !j.contains("members") || !j["members"].is_array()) {
    throw ParseError("IIS report must be an object with a 'members' array");
  }
  for (const auto& m : j["members"]) r.members.push_back(m.get<std::string>());
  r.size = static_cast<int>(r.members.size());
  return r;
}

namespace {

SolveStatus probe(const std::vector<PseudoRow>& rows, const std::vector<bool>& active,
                  int num_vars, const SolverConfig& cfg) {
  std::vector<PseudoRow> subset;
  subset.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (active[i]) subset.push_back(rows[i]);
  }
  const SolveStatus st = row_system_feasibility(subset, num_vars, cfg);
  if (st == SolveStatus::ERROR) {
    throw SolverTimeoutError("feasibility probe failed during conflict isolation");
  }
  return st;
}

}  // namespace

IisReport compute_iis(const LpModel& model, const SolverConfig& cfg) {
  model.check();
  const std::vector<PseudoRow> rows = build_rows(model);
  const int num_vars = static_cast<int>(model.variables.size());

  std::vector<bool> active(rows.size(), true);
  if (probe(rows, active, num_vars, cfg) != SolveStatus::INFEASIBLE) {
    throw NotInfeasibleError("conflict isolation requires an INFEASIBLE model");
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    active[i] = false;
    if (probe(rows, active, num_vars, cfg) != SolveStatus::INFEASIBLE) {
      active[i] = true;  // row i is necessary for the conflict
    }
  }

  IisReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (active[i]) report.members.push_back(rows[i].name);
  }
  report.size = static_cast<int>(report.members.size());
  return report;
}

bool iis_invariants_hold(const LpModel& model, const IisReport& iis,
                         const SolverConfig& cfg) {
  const std::vector<PseudoRow> rows = build_rows(model);
  const int num_vars = static_cast<int>(model.variables.size());

  std::vector<bool> member(rows.size(), false);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::find(iis.members.begin(), iis.members.end(), rows[i].name) !=
        iis.members.end()) {
      member[i] = true;
      ++matched;
    }
  }
  if (matched != iis.members.size()) return false;  // unknown member name

  if (probe(rows, member, num_vars, cfg) != SolveStatus::INFEASIBLE) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!member[i]) continue;
    std::vector<bool> without = member;
    without[i] = false;
    if (probe(rows, without, num_vars, cfg) == SolveStatus::INFEASIBLE) return false;
  }
  return true;
}

}  // namespace orgym
