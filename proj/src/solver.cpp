#include "orgym/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace orgym {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL: return "OPTIMAL";
    case SolveStatus::INFEASIBLE: return "INFEASIBLE";
    case SolveStatus::UNBOUNDED: return "UNBOUNDED";
    case SolveStatus::ERROR: return "ERROR";
  }
  return "ERROR";
}

SolveStatus solve_status_from_string(std::string_view s) {
  if (s == "OPTIMAL") return SolveStatus::OPTIMAL;
  if (s == "INFEASIBLE") return SolveStatus::INFEASIBLE;
  if (s == "UNBOUNDED") return SolveStatus::UNBOUNDED;
  if (s == "ERROR") return SolveStatus::ERROR;
  throw ParseError("unknown solve status: " + std::string(s));
}

std::vector<PseudoRow> build_rows(const LpModel& model) {
  std::vector<PseudoRow> rows;
  rows.reserve(model.constraints.size() + 2 * model.variables.size());
  for (const Constraint& c : model.constraints) {
    PseudoRow r;
    r.name = c.name;
    r.is_bound = false;
    r.sense = c.sense;
    r.rhs = c.rhs;
    for (const auto& [var, coeff] : c.terms) {
      r.terms.emplace_back(model.variable_index(var), coeff);
    }
    rows.push_back(std::move(r));
  }
  for (std::size_t vi = 0; vi < model.variables.size(); ++vi) {
    const Variable& v = model.variables[vi];
    if (std::isfinite(v.lower)) {
      PseudoRow r;
      r.name = bound_constraint_name(v.name, true);
      r.is_bound = true;
      r.sense = Sense::GE;
      r.rhs = v.lower;
      r.terms.emplace_back(static_cast<int>(vi), 1.0);
      rows.push_back(std::move(r));
    }
    if (std::isfinite(v.upper)) {
      PseudoRow r;
      r.name = bound_constraint_name(v.name, false);
      r.is_bound = true;
      r.sense = Sense::LE;
      r.rhs = v.upper;
      r.terms.emplace_back(static_cast<int>(vi), 1.0);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

namespace {

struct InternalTimeout {};

// Result of the raw engine over a row system with free variables.
struct EngineResult {
  SolveStatus status = SolveStatus::ERROR;
  std::vector<double> x;  // per structural variable
  std::vector<double> y;  // per row, original orientation, min-space
  double infeasibility = 0.0;
  int iterations = 0;
  std::string message;
};

// Dense two-phase primal simplex over rows with free structural variables.
// Free variables are split x = p - n; each row gets a slack (<=), a surplus
// plus an artificial (>=), or an artificial (==) after normalizing rhs >= 0.
// Bland's rule (lowest eligible index enters; lowest basic index leaves on
// ratio ties) guarantees termination and determinism.
class SimplexEngine {
 public:
  SimplexEngine(const std::vector<PseudoRow>& rows, int num_vars,
                std::vector<double> min_costs, const SolverConfig& cfg)
      : cfg_(cfg), num_vars_(num_vars), costs_(std::move(min_costs)) {
    const int m = static_cast<int>(rows.size());
    negated_.assign(static_cast<std::size_t>(m), false);
    senses_.resize(static_cast<std::size_t>(m));
    rhs0_.resize(static_cast<std::size_t>(m));

    int num_slack = 0;
    int num_art = 0;
    for (int i = 0; i < m; ++i) {
      Sense s = rows[static_cast<std::size_t>(i)].sense;
      double rhs = rows[static_cast<std::size_t>(i)].rhs;
      if (rhs < 0.0) {
        negated_[static_cast<std::size_t>(i)] = true;
        rhs = -rhs;
        if (s == Sense::LE) s = Sense::GE;
        else if (s == Sense::GE) s = Sense::LE;
      }
      senses_[static_cast<std::size_t>(i)] = s;
      rhs0_[static_cast<std::size_t>(i)] = rhs;
      if (s == Sense::LE) {
        ++num_slack;
      } else if (s == Sense::GE) {
        ++num_slack;  // surplus
        ++num_art;
      } else {
        ++num_art;
      }
    }

    m_ = m;
    struct_cols_ = 2 * num_vars_;
    slack_base_ = struct_cols_;
    art_base_ = slack_base_ + num_slack;
    ncols_ = art_base_ + num_art;

    tab_.assign(static_cast<std::size_t>(m_) * width(), 0.0);
    basis_.assign(static_cast<std::size_t>(m_), -1);

    int next_slack = slack_base_;
    int next_art = art_base_;
    for (int i = 0; i < m; ++i) {
      const double sign = negated_[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
      for (const auto& [vi, coeff] : rows[static_cast<std::size_t>(i)].terms) {
        at(i, 2 * vi) += sign * coeff;
        at(i, 2 * vi + 1) -= sign * coeff;
      }
      at(i, width() - 1) = rhs0_[static_cast<std::size_t>(i)];
      switch (senses_[static_cast<std::size_t>(i)]) {
        case Sense::LE:
          at(i, next_slack) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_slack++;
          break;
        case Sense::GE:
          at(i, next_slack) = -1.0;
          ++next_slack;
          at(i, next_art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_art++;
          break;
        case Sense::EQ:
          at(i, next_art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = next_art++;
          break;
      }
    }

    // Snapshot of the initial standard-form matrix, used to recover duals
    // from the final basis.
    tab0_ = tab_;
  }

  EngineResult run(bool feasibility_only) {
    EngineResult res;
    start_ = std::chrono::steady_clock::now();
    try {
      // Phase 1: minimize the sum of artificial variables.
      std::vector<double> phase1(static_cast<std::size_t>(ncols_), 0.0);
      for (int j = art_base_; j < ncols_; ++j) phase1[static_cast<std::size_t>(j)] = 1.0;
      iterate(phase1, res.iterations);

      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (basis_[static_cast<std::size_t>(i)] >= art_base_) {
          infeas += at(i, width() - 1);
        }
      }
      if (infeas > cfg_.feasibility_tol) {
        res.status = SolveStatus::INFEASIBLE;
        res.infeasibility = infeas;
        res.x = extract_x();
        return res;
      }

      // Pivot basic artificials out where possible; rows whose non-artificial
      // entries are all zero are redundant and stay inert (their artificial
      // is basic at zero and no admissible pivot can ever touch the row).
      for (int i = 0; i < m_; ++i) {
        if (basis_[static_cast<std::size_t>(i)] < art_base_) continue;
        for (int j = 0; j < art_base_; ++j) {
          if (std::fabs(at(i, j)) > cfg_.pivot_tol) {
            pivot(i, j);
            break;
          }
        }
      }

      if (!feasibility_only) {
        std::vector<double> phase2(static_cast<std::size_t>(ncols_), 0.0);
        for (int v = 0; v < num_vars_; ++v) {
          phase2[static_cast<std::size_t>(2 * v)] = costs_[static_cast<std::size_t>(v)];
          phase2[static_cast<std::size_t>(2 * v + 1)] = -costs_[static_cast<std::size_t>(v)];
        }
        if (!iterate(phase2, res.iterations)) {
          res.status = SolveStatus::UNBOUNDED;
          res.message = "objective improves without bound";
          return res;
        }
        res.y = extract_duals(phase2);
      } else {
        res.y.assign(static_cast<std::size_t>(m_), 0.0);
      }

      res.status = SolveStatus::OPTIMAL;
      res.x = extract_x();
      return res;
    } catch (const InternalTimeout&) {
      res.status = SolveStatus::ERROR;
      res.message = "solve exceeded its time or iteration budget";
      return res;
    }
  }

 private:
  int width() const { return ncols_ + 1; }
  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * width() + j]; }
  double at0(int i, int j) const { return tab0_[static_cast<std::size_t>(i) * width() + j]; }

  // Runs simplex iterations for the given min-objective. Returns false when
  // the objective is unbounded below. Artificial columns never enter.
  bool iterate(const std::vector<double>& costs, int& iterations) {
    // Reduced costs, recomputed at phase start and maintained by pivots.
    std::vector<double> d(static_cast<std::size_t>(ncols_), 0.0);
    for (int j = 0; j < ncols_; ++j) {
      double z = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double cb = costs[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
        if (cb != 0.0) z += cb * at(i, j);
      }
      d[static_cast<std::size_t>(j)] = costs[static_cast<std::size_t>(j)] - z;
    }

    for (;;) {
      if (++iterations > cfg_.max_iterations) throw InternalTimeout{};
      if ((iterations & 63) == 0) check_clock();

      // Bland: lowest-index eligible entering column.
      int enter = -1;
      for (int j = 0; j < art_base_; ++j) {
        if (d[static_cast<std::size_t>(j)] < -cfg_.optimality_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;  // optimal for this phase

      // Ratio test; ties go to the row with the lowest basic column index.
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= cfg_.pivot_tol) continue;
        const double ratio = at(i, width() - 1) / a;
        if (leave < 0 || ratio < best - 1e-12) {
          leave = i;
          best = ratio;
        } else if (ratio <= best + 1e-12 &&
                   basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
          leave = i;
        }
      }
      if (leave < 0) return false;  // unbounded direction

      // Maintain reduced costs: the post-pivot row is already divided by the
      // pivot element, so the multiplier is the raw entering reduced cost.
      const double enter_cost = d[static_cast<std::size_t>(enter)];
      pivot(leave, enter);
      for (int j = 0; j < ncols_; ++j) {
        d[static_cast<std::size_t>(j)] -= enter_cost * at(leave, j);
      }
      d[static_cast<std::size_t>(enter)] = 0.0;
    }
  }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    for (int j = 0; j < width(); ++j) at(pr, j) /= p;
    at(pr, pc) = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == pr) continue;
      const double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j < width(); ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    basis_[static_cast<std::size_t>(pr)] = pc;
  }

  std::vector<double> extract_x() const {
    std::vector<double> col_val(static_cast<std::size_t>(ncols_), 0.0);
    for (int i = 0; i < m_; ++i) {
      col_val[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] =
          tab_[static_cast<std::size_t>(i) * width() + width() - 1];
    }
    std::vector<double> x(static_cast<std::size_t>(num_vars_), 0.0);
    for (int v = 0; v < num_vars_; ++v) {
      x[static_cast<std::size_t>(v)] =
          col_val[static_cast<std::size_t>(2 * v)] - col_val[static_cast<std::size_t>(2 * v + 1)];
    }
    return x;
  }

  // Solves B^T y = c_B against the initial standard-form matrix, then maps
  // the multipliers back to the original row orientation. In equality form
  // the identity sum(y_i * rhs_i) == objective holds exactly, and negated
  // rows flip their multiplier's sign.
  std::vector<double> extract_duals(const std::vector<double>& costs) const {
    const int n = m_;
    std::vector<double> a(static_cast<std::size_t>(n) * (n + 1), 0.0);
    for (int r = 0; r < n; ++r) {  // row r of B^T = column basis_[r] of B
      for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(r) * (n + 1) + i] = at0(i, basis_[static_cast<std::size_t>(r)]);
      }
      a[static_cast<std::size_t>(r) * (n + 1) + n] =
          costs[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
    }
    // Gaussian elimination with partial pivoting.
    for (int c = 0; c < n; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r) {
        if (std::fabs(a[static_cast<std::size_t>(r) * (n + 1) + c]) >
            std::fabs(a[static_cast<std::size_t>(p) * (n + 1) + c])) {
          p = r;
        }
      }
      if (std::fabs(a[static_cast<std::size_t>(p) * (n + 1) + c]) < 1e-12) continue;
      if (p != c) {
        for (int j = c; j <= n; ++j) {
          std::swap(a[static_cast<std::size_t>(p) * (n + 1) + j],
                    a[static_cast<std::size_t>(c) * (n + 1) + j]);
        }
      }
      const double piv = a[static_cast<std::size_t>(c) * (n + 1) + c];
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = a[static_cast<std::size_t>(r) * (n + 1) + c] / piv;
        if (f == 0.0) continue;
        for (int j = c; j <= n; ++j) {
          a[static_cast<std::size_t>(r) * (n + 1) + j] -=
              f * a[static_cast<std::size_t>(c) * (n + 1) + j];
        }
      }
    }
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
      const double piv = a[static_cast<std::size_t>(c) * (n + 1) + c];
      y[static_cast<std::size_t>(c)] =
          std::fabs(piv) < 1e-12 ? 0.0 : a[static_cast<std::size_t>(c) * (n + 1) + n] / piv;
    }
    for (int i = 0; i < n; ++i) {
      if (negated_[static_cast<std::size_t>(i)]) y[static_cast<std::size_t>(i)] = -y[static_cast<std::size_t>(i)];
    }
    return y;
  }

  void check_clock() const {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start_).count();
    if (elapsed > cfg_.timeout_seconds) throw InternalTimeout{};
  }

  SolverConfig cfg_;
  int num_vars_ = 0;
  std::vector<double> costs_;
  int m_ = 0;
  int struct_cols_ = 0;
  int slack_base_ = 0;
  int art_base_ = 0;
  int ncols_ = 0;
  std::vector<double> tab_;
  std::vector<double> tab0_;
  std::vector<int> basis_;
  std::vector<bool> negated_;
  std::vector<Sense> senses_;
  std::vector<double> rhs0_;
  std::chrono::steady_clock::time_point start_;
};

double row_activity(const PseudoRow& row, const std::vector<double>& x) {
  double act = 0.0;
  for (const auto& [vi, coeff] : row.terms) {
    act += coeff * x[static_cast<std::size_t>(vi)];
  }
  return act;
}

// Slack sign convention: nonnegative means satisfied, negative means violated
// by that magnitude. LE: rhs - activity; GE: activity - rhs; EQ: -|activity -
// rhs| (zero when met exactly).
double signed_slack(Sense sense, double rhs, double activity) {
  switch (sense) {
    case Sense::LE: return rhs - activity;
    case Sense::GE: return activity - rhs;
    case Sense::EQ: {
      const double gap = std::fabs(activity - rhs);
      return gap == 0.0 ? 0.0 : -gap;
    }
  }
  return 0.0;
}

// Shared implementation behind solve() / solve_feasibility().
SolveResult solve_impl(const LpModel& model, const SolverConfig& cfg,
                       bool feasibility_only) {
  model.check();
  SolveResult out;

  const int num_vars = static_cast<int>(model.variables.size());
  if (num_vars == 0) {
    out.status = SolveStatus::OPTIMAL;
    out.objective = 0.0;
    return out;
  }

  std::vector<double> costs(static_cast<std::size_t>(num_vars), 0.0);
  if (!feasibility_only) {
    const double sign = model.objective_sense == ObjSense::MAX ? -1.0 : 1.0;
    for (int v = 0; v < num_vars; ++v) {
      costs[static_cast<std::size_t>(v)] = sign * model.variables[static_cast<std::size_t>(v)].obj_coeff;
    }
  }

  const std::vector<PseudoRow> rows = build_rows(model);
  SimplexEngine engine(rows, num_vars, costs, cfg);
  const EngineResult r = engine.run(feasibility_only);

  out.status = r.status;
  out.iterations = r.iterations;
  out.infeasibility = r.infeasibility;
  out.message = r.message;

  if (r.status == SolveStatus::OPTIMAL || r.status == SolveStatus::INFEASIBLE) {
    for (int v = 0; v < num_vars; ++v) {
      out.primal[model.variables[static_cast<std::size_t>(v)].name] = r.x[static_cast<std::size_t>(v)];
    }
    for (const PseudoRow& row : rows) {
      if (!row.is_bound) {
        out.slacks[row.name] = signed_slack(row.sense, row.rhs, row_activity(row, r.x));
      }
    }
  }
  if (r.status == SolveStatus::OPTIMAL) {
    double obj = 0.0;
    for (int v = 0; v < num_vars; ++v) {
      obj += model.variables[static_cast<std::size_t>(v)].obj_coeff * r.x[static_cast<std::size_t>(v)];
    }
    out.objective = feasibility_only ? 0.0 : obj;
    if (!feasibility_only) {
      const double sign = model.objective_sense == ObjSense::MAX ? -1.0 : 1.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out.duals[rows[i].name] = sign * r.y[i];
      }
    }
  }
  return out;
}

}  // namespace

SolveResult solve(const LpModel& model, const SolverConfig& cfg) {
  return solve_impl(model, cfg, /*feasibility_only=*/false);
}

SolveResult solve_feasibility(const LpModel& model, const SolverConfig& cfg) {
  return solve_impl(model, cfg, /*feasibility_only=*/true);
}

SolveStatus row_system_feasibility(const std::vector<PseudoRow>& rows,
                                   int num_vars, const SolverConfig& cfg) {
  const std::vector<double> zero(static_cast<std::size_t>(num_vars), 0.0);
  SimplexEngine engine(rows, num_vars, zero, cfg);
  return engine.run(/*feasibility_only=*/true).status;
}

std::map<std::string, double> constraint_slacks(
    const LpModel& model, const std::map<std::string, double>& point) {
  std::map<std::string, double> out;
  for (const Constraint& c : model.constraints) {
    double act = 0.0;
    for (const auto& [var, coeff] : c.terms) {
      const auto it = point.find(var);
      if (it == point.end()) {
        throw UnknownVariableError("point does not cover variable '" + var +
                                   "' used by constraint '" + c.name + "'");
      }
      act += coeff * it->second;
    }
    out[c.name] = signed_slack(c.sense, c.rhs, act);
  }
  return out;
}

std::string serialize_result(const SolveResult& r) {
  JsonWriter w;
  w.begin_object();
  w.key("status");
  w.value(to_string(r.status));
  w.key("objective");
  if (r.objective) w.value(*r.objective);
  else w.value_null();
  w.key("primal");
  w.begin_object();
  for (const auto& [name, v] : r.primal) {
    w.key(name);
    w.value(v);
  }
  w.end_object();
  w.key("duals");
  w.begin_object();
  for (const auto& [name, v] : r.duals) {
    w.key(name);
    w.value(v);
  }
  w.end_object();
  w.key("slacks");
  w.begin_object();
  for (const auto& [name, v] : r.slacks) {
    w.key(name);
    w.value(v);
  }
  w.end_object();
  w.key("infeasibility");
  w.value(r.infeasibility);
  w.key("iterations");
  w.value(r.iterations);
  w.key("message");
  w.value(r.message);
  w.end_object();
  return w.str();
}

}  // namespace orgym
