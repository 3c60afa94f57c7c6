#include "orgym/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace orgym {

std::string_view to_string(Sense s) {
  switch (s) {
    case Sense::LE: return "<=";
    case Sense::GE: return ">=";
    case Sense::EQ: return "==";
  }
  return "<=";
}

std::string_view to_string(ObjSense s) {
  return s == ObjSense::MIN ? "min" : "max";
}

Sense sense_from_string(std::string_view s) {
  if (s == "<=") return Sense::LE;
  if (s == ">=") return Sense::GE;
  if (s == "==" || s == "=") return Sense::EQ;
  throw ParseError("unknown constraint sense: " + std::string(s));
}

ObjSense obj_sense_from_string(std::string_view s) {
  if (s == "min" || s == "minimize") return ObjSense::MIN;
  if (s == "max" || s == "maximize") return ObjSense::MAX;
  throw ParseError("unknown objective sense: " + std::string(s));
}

std::string bound_constraint_name(std::string_view var, bool lower) {
  return std::string(var) + (lower ? "__lb" : "__ub");
}

std::optional<std::string> split_bound_name(std::string_view name, bool& lower) {
  if (name.size() <= 4) return std::nullopt;
  const std::string_view suffix = name.substr(name.size() - 4);
  if (suffix == "__lb") {
    lower = true;
  } else if (suffix == "__ub") {
    lower = false;
  } else {
    return std::nullopt;
  }
  return std::string(name.substr(0, name.size() - 4));
}

int LpModel::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int LpModel::constraint_index(std::string_view name) const {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    if (constraints[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

const Variable* LpModel::find_variable(std::string_view name) const {
  const int i = variable_index(name);
  return i < 0 ? nullptr : &variables[static_cast<std::size_t>(i)];
}

const Constraint* LpModel::find_constraint(std::string_view name) const {
  const int i = constraint_index(name);
  return i < 0 ? nullptr : &constraints[static_cast<std::size_t>(i)];
}

void LpModel::check() const {
  std::set<std::string> seen;
  for (const Variable& v : variables) {
    if (v.name.empty()) throw InvalidModelError("variable with empty name");
    if (!seen.insert(v.name).second) {
      throw InvalidModelError("duplicate variable name: " + v.name);
    }
    if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.obj_coeff)) {
      throw InvalidModelError("non-finite numeric field on variable " + v.name);
    }
    if (v.lower > v.upper) {
      throw InvalidModelError("crossed bounds on variable " + v.name);
    }
  }
  std::set<std::string> bound_names;
  for (const Variable& v : variables) {
    bound_names.insert(bound_constraint_name(v.name, true));
    bound_names.insert(bound_constraint_name(v.name, false));
  }
  std::set<std::string> cseen;
  for (const Constraint& c : constraints) {
    if (c.name.empty()) throw InvalidModelError("constraint with empty name");
    if (!cseen.insert(c.name).second) {
      throw InvalidModelError("duplicate constraint name: " + c.name);
    }
    if (bound_names.count(c.name)) {
      throw InvalidModelError("constraint name shadows a variable bound: " + c.name);
    }
    if (c.terms.empty()) {
      throw InvalidModelError("constraint with no terms: " + c.name);
    }
    for (const auto& [var, coeff] : c.terms) {
      if (variable_index(var) < 0) {
        throw InvalidModelError("constraint " + c.name + " references unknown variable " + var);
      }
      if (!std::isfinite(coeff)) {
        throw InvalidModelError("non-finite coefficient in constraint " + c.name);
      }
    }
    if (!std::isfinite(c.rhs)) {
      throw InvalidModelError("non-finite rhs in constraint " + c.name);
    }
  }
}

ModelEdit ModelEdit::set_rhs(std::string target, double rhs) {
  ModelEdit e;
  e.kind = Kind::kSetRhs;
  e.target = std::move(target);
  e.value = rhs;
  return e;
}

ModelEdit ModelEdit::relax(std::string target, double delta) {
  ModelEdit e;
  e.kind = Kind::kRelax;
  e.target = std::move(target);
  e.value = delta;
  return e;
}

ModelEdit ModelEdit::flip_sense(std::string target) {
  ModelEdit e;
  e.kind = Kind::kFlipSense;
  e.target = std::move(target);
  return e;
}

ModelEdit ModelEdit::drop(std::string target) {
  ModelEdit e;
  e.kind = Kind::kDrop;
  e.target = std::move(target);
  return e;
}

ModelEdit ModelEdit::rewrite(Constraint replacement) {
  ModelEdit e;
  e.kind = Kind::kRewrite;
  e.target = replacement.name;
  e.constraint = std::move(replacement);
  return e;
}

ModelEdit ModelEdit::set_bound(std::string var, bool lower, double value) {
  ModelEdit e;
  e.kind = Kind::kSetBound;
  e.target = std::move(var);
  e.lower_bound = lower;
  e.value = value;
  return e;
}

ModelEdit ModelEdit::add_constraint(Constraint added) {
  ModelEdit e;
  e.kind = Kind::kAddConstraint;
  e.target = added.name;
  e.constraint = std::move(added);
  return e;
}

namespace {

// Resolves an edit target that may name either an explicit constraint or a
// variable bound ("<var>__lb"/"<var>__ub"). Exactly one of the outputs is
// set on success.
struct EditTarget {
  int constraint = -1;
  int variable = -1;
  bool lower = false;
};

EditTarget resolve_target(const LpModel& m, const std::string& name) {
  EditTarget t;
  t.constraint = m.constraint_index(name);
  if (t.constraint >= 0) return t;
  bool lower = false;
  if (auto var = split_bound_name(name, lower)) {
    t.variable = m.variable_index(*var);
    t.lower = lower;
    if (t.variable >= 0) return t;
  }
  throw InvalidModelError("edit target not found: " + name);
}

}  // namespace

LpModel apply_edit(const LpModel& model, const ModelEdit& edit) {
  LpModel m = model;
  using Kind = ModelEdit::Kind;
  switch (edit.kind) {
    case Kind::kSetRhs:
    case Kind::kRelax: {
      const EditTarget t = resolve_target(m, edit.target);
      if (t.constraint >= 0) {
        double& rhs = m.constraints[static_cast<std::size_t>(t.constraint)].rhs;
        rhs = edit.kind == Kind::kSetRhs ? edit.value : rhs + edit.value;
      } else {
        Variable& v = m.variables[static_cast<std::size_t>(t.variable)];
        double& b = t.lower ? v.lower : v.upper;
        b = edit.kind == Kind::kSetRhs ? edit.value : b + edit.value;
      }
      break;
    }
    case Kind::kFlipSense: {
      const EditTarget t = resolve_target(m, edit.target);
      if (t.constraint < 0) {
        throw InvalidModelError("cannot flip a variable bound: " + edit.target);
      }
      Constraint& c = m.constraints[static_cast<std::size_t>(t.constraint)];
      if (c.sense == Sense::EQ) {
        throw InvalidModelError("cannot flip an equality constraint: " + edit.target);
      }
      c.sense = c.sense == Sense::LE ? Sense::GE : Sense::LE;
      break;
    }
    case Kind::kDrop: {
      const EditTarget t = resolve_target(m, edit.target);
      if (t.constraint >= 0) {
        m.constraints.erase(m.constraints.begin() + t.constraint);
      } else {
        Variable& v = m.variables[static_cast<std::size_t>(t.variable)];
        (t.lower ? v.lower : v.upper) = t.lower ? -kInf : kInf;
      }
      break;
    }
    case Kind::kRewrite: {
      if (!edit.constraint) throw InvalidModelError("rewrite edit without payload");
      const int i = m.constraint_index(edit.target);
      if (i < 0) throw InvalidModelError("edit target not found: " + edit.target);
      Constraint replacement = *edit.constraint;
      replacement.name = edit.target;  // rewrites never rename
      m.constraints[static_cast<std::size_t>(i)] = std::move(replacement);
      break;
    }
    case Kind::kSetBound: {
      const int i = m.variable_index(edit.target);
      if (i < 0) throw InvalidModelError("edit target not found: " + edit.target);
      Variable& v = m.variables[static_cast<std::size_t>(i)];
      (edit.lower_bound ? v.lower : v.upper) = edit.value;
      break;
    }
    case Kind::kAddConstraint: {
      if (!edit.constraint) throw InvalidModelError("add edit without payload");
      if (m.constraint_index(edit.constraint->name) >= 0) {
        throw InvalidModelError("added constraint name already exists: " + edit.constraint->name);
      }
      m.constraints.push_back(*edit.constraint);
      break;
    }
  }
  m.check();
  return m;
}

void write_model(JsonWriter& w, const LpModel& model) {
  w.begin_object();
  w.key("schema_version");
  w.value(1);
  w.key("objective_sense");
  w.value(to_string(model.objective_sense));
  w.key("variables");
  w.begin_array();
  for (const Variable& v : model.variables) {
    w.begin_object();
    w.key("name");
    w.value(v.name);
    w.key("lower");
    w.value(v.lower);
    w.key("upper");
    w.value(v.upper);
    w.key("obj_coeff");
    w.value(v.obj_coeff);
    w.end_object();
  }
  w.end_array();
  w.key("constraints");
  w.begin_array();
  for (const Constraint& c : model.constraints) {
    w.begin_object();
    w.key("name");
    w.value(c.name);
    w.key("terms");
    w.begin_object();
    for (const auto& [var, coeff] : c.terms) {
      w.key(var);
      w.value(coeff);
    }
    w.end_object();
    w.key("sense");
    w.value(to_string(c.sense));
    w.key("rhs");
    w.value(c.rhs);
    w.end_object();
  }
  w.end_array();
  w.key("description");
  w.value(model.description);
  w.end_object();
}

std::string serialize_model(const LpModel& model) {
  JsonWriter w;
  write_model(w, model);
  return w.str();
}

LpModel parse_model(const Json& j) {
  if (!j.is_object()) throw ParseError("model: expected a JSON object");
  LpModel m;
  m.objective_sense = obj_sense_from_string(
      j.value("objective_sense", std::string("min")));
  if (!j.contains("variables") || !j["variables"].is_array()) {
    throw ParseError("model: missing variables array");
  }
  for (const Json& vj : j["variables"]) {
    Variable v;
    v.name = vj.at("name").get<std::string>();
    v.lower = vj.contains("lower") ? parse_extended_number(vj["lower"], "variable lower") : 0.0;
    v.upper = vj.contains("upper") ? parse_extended_number(vj["upper"], "variable upper") : kInf;
    v.obj_coeff = vj.value("obj_coeff", 0.0);
    m.variables.push_back(std::move(v));
  }
  if (!j.contains("constraints") || !j["constraints"].is_array()) {
    throw ParseError("model: missing constraints array");
  }
  for (const Json& cj : j["constraints"]) {
    Constraint c;
    c.name = cj.at("name").get<std::string>();
    if (!cj.contains("terms") || !cj["terms"].is_object()) {
      throw ParseError("constraint " + c.name + ": missing terms object");
    }
    for (const auto& [var, coeff] : cj["terms"].items()) {
      if (!coeff.is_number()) {
        throw ParseError("constraint " + c.name + ": non-numeric coefficient");
      }
      c.terms[var] = coeff.get<double>();
    }
    c.sense = sense_from_string(cj.at("sense").get<std::string>());
    c.rhs = cj.at("rhs").get<double>();
    m.constraints.push_back(std::move(c));
  }
  m.description = j.value("description", std::string());
  m.check();
  return m;
}

LpModel parse_model_text(std::string_view text) {
  return parse_model(parse_json(text, "model"));
}

bool models_equal(const LpModel& a, const LpModel& b) {
  // Canonical serialization is lossless, so byte equality is exact
  // structural/numeric equality.
  return serialize_model(a) == serialize_model(b);
}

std::string_view to_string(ModelEdit::Kind k) {
  using Kind = ModelEdit::Kind;
  switch (k) {
    case Kind::kSetRhs: return "set_rhs";
    case Kind::kRelax: return "relax";
    case Kind::kFlipSense: return "flip_sense";
    case Kind::kDrop: return "drop";
    case Kind::kRewrite: return "rewrite";
    case Kind::kSetBound: return "set_bound";
    case Kind::kAddConstraint: return "add_constraint";
  }
  return "set_rhs";
}

ModelEdit::Kind edit_kind_from_string(std::string_view s) {
  using Kind = ModelEdit::Kind;
  if (s == "set_rhs") return Kind::kSetRhs;
  if (s == "relax") return Kind::kRelax;
  if (s == "flip_sense") return Kind::kFlipSense;
  if (s == "drop") return Kind::kDrop;
  if (s == "rewrite") return Kind::kRewrite;
  if (s == "set_bound") return Kind::kSetBound;
  if (s == "add_constraint") return Kind::kAddConstraint;
  throw ParseError("unknown edit kind: " + std::string(s));
}

namespace {

void write_constraint_fragment(JsonWriter& w, const Constraint& c) {
  w.begin_object();
  w.key("name");
  w.value(c.name);
  w.key("terms");
  w.begin_object();
  for (const auto& [var, coeff] : c.terms) {
    w.key(var);
    w.value(coeff);
  }
  w.end_object();
  w.key("sense");
  w.value(to_string(c.sense));
  w.key("rhs");
  w.value(c.rhs);
  w.end_object();
}

Constraint parse_constraint_fragment(const Json& cj) {
  Constraint c;
  c.name = cj.at("name").get<std::string>();
  for (const auto& [var, coeff] : cj.at("terms").items()) {
    c.terms[var] = coeff.get<double>();
  }
  c.sense = sense_from_string(cj.at("sense").get<std::string>());
  c.rhs = cj.at("rhs").get<double>();
  return c;
}

}  // namespace

void write_edit(JsonWriter& w, const ModelEdit& e) {
  w.begin_object();
  w.key("kind");
  w.value(to_string(e.kind));
  w.key("target");
  w.value(e.target);
  switch (e.kind) {
    case ModelEdit::Kind::kSetRhs:
    case ModelEdit::Kind::kRelax:
      w.key("value");
      w.value(e.value);
      break;
    case ModelEdit::Kind::kSetBound:
      w.key("side");
      w.value(e.lower_bound ? "lower" : "upper");
      w.key("value");
      w.value(e.value);
      break;
    case ModelEdit::Kind::kRewrite:
    case ModelEdit::Kind::kAddConstraint:
      w.key("constraint");
      write_constraint_fragment(w, *e.constraint);
      break;
    case ModelEdit::Kind::kFlipSense:
    case ModelEdit::Kind::kDrop:
      break;
  }
  w.end_object();
}

ModelEdit parse_edit(const Json& j) {
  ModelEdit e;
  e.kind = edit_kind_from_string(j.at("kind").get<std::string>());
  e.target = j.at("target").get<std::string>();
  switch (e.kind) {
    case ModelEdit::Kind::kSetRhs:
    case ModelEdit::Kind::kRelax:
      e.value = j.at("value").get<double>();
      break;
    case ModelEdit::Kind::kSetBound:
      e.lower_bound = j.at("side").get<std::string>() == "lower";
      e.value = parse_extended_number(j.at("value"), "bound value");
      break;
    case ModelEdit::Kind::kRewrite:
    case ModelEdit::Kind::kAddConstraint:
      e.constraint = parse_constraint_fragment(j.at("constraint"));
      break;
    case ModelEdit::Kind::kFlipSense:
    case ModelEdit::Kind::kDrop:
      break;
  }
  return e;
}

}  // namespace orgym
