// Linear program representation: variables with bounds, named linear
// constraints, a linear objective, plus the edit operations the rest of the
// toolkit applies to models (sabotage injection, ground-truth fixes, agent
// repairs). Models are value types; every edit returns a modified copy.
#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orgym/jsonio.hpp"

namespace orgym {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LE, GE, EQ };
enum class ObjSense { MIN, MAX };

std::string_view to_string(Sense s);
std::string_view to_string(ObjSense s);
Sense sense_from_string(std::string_view s);
ObjSense obj_sense_from_string(std::string_view s);

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double obj_coeff = 0.0;
};

struct Constraint {
  std::string name;
  // Keyed by variable name; std::map keeps term order canonical.
  std::map<std::string, double> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

// Variable bounds participate in infeasibility analysis as implicit
// constraints named "<var>__lb" / "<var>__ub".
std::string bound_constraint_name(std::string_view var, bool lower);
// If `name` has the "<var>__lb"/"<var>__ub" shape, returns the variable part
// and sets `lower`; returns std::nullopt otherwise.
std::optional<std::string> split_bound_name(std::string_view name, bool& lower);

struct LpModel {
  ObjSense objective_sense = ObjSense::MIN;
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::string description;

  int variable_index(std::string_view name) const;
  int constraint_index(std::string_view name) const;
  const Variable* find_variable(std::string_view name) const;
  const Constraint* find_constraint(std::string_view name) const;

  // Throws InvalidModelError if any structural invariant fails: unique
  // non-empty names, constraints reference existing variables, non-empty
  // terms, finite coefficients and right-hand sides, lower <= upper, and no
  // explicit constraint shadowing a "<var>__lb"/"<var>__ub" bound name.
  void check() const;
};

struct ModelEdit {
  enum class Kind {
    kSetRhs,         // target constraint (or bound name): rhs = value
    kRelax,          // target constraint (or bound name): rhs += value
    kFlipSense,      // target constraint: <= becomes >= and vice versa
    kDrop,           // target constraint removed (bound name: relaxed to +-inf)
    kRewrite,        // target constraint replaced by `constraint`
    kSetBound,       // target variable: lower or upper bound = value
    kAddConstraint,  // `constraint` appended under a fresh name
  };

  Kind kind = Kind::kSetRhs;
  std::string target;       // constraint name; variable name for kSetBound
  double value = 0.0;       // new rhs / delta / bound value
  bool lower_bound = true;  // kSetBound: which side
  std::optional<Constraint> constraint;  // kRewrite / kAddConstraint payload

  static ModelEdit set_rhs(std::string target, double rhs);
  static ModelEdit relax(std::string target, double delta);
  static ModelEdit flip_sense(std::string target);
  static ModelEdit drop(std::string target);
  static ModelEdit rewrite(Constraint replacement);
  static ModelEdit set_bound(std::string var, bool lower, double value);
  static ModelEdit add_constraint(Constraint added);
};

// Applies one edit and returns the modified model. Pure: the input is not
// touched. Throws InvalidModelError for unknown targets, sense flips on
// equalities, or edits that leave the model structurally invalid.
LpModel apply_edit(const LpModel& model, const ModelEdit& edit);

// Canonical serialization: fixed key order, 17-significant-digit numbers,
// infinities as "+inf"/"-inf". parse_model(serialize_model(m)) reproduces m
// bit-exactly.
std::string serialize_model(const LpModel& model);
void write_model(JsonWriter& w, const LpModel& model);
LpModel parse_model(const Json& j);
LpModel parse_model_text(std::string_view text);

// Exact structural equality (names, order, bit-identical numerics).
bool models_equal(const LpModel& a, const LpModel& b);

// Edit (de)serialization, used inside ground-truth fix lists.
void write_edit(JsonWriter& w, const ModelEdit& e);
ModelEdit parse_edit(const Json& j);
std::string_view to_string(ModelEdit::Kind k);
ModelEdit::Kind edit_kind_from_string(std::string_view s);

}  // namespace orgym
