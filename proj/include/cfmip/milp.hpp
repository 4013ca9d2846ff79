// Copyright 2026 The cfmip Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file milp.hpp
 * @brief Append-only mixed-integer linear program with construction helpers
 * and LP-format export.
 */
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cfmip/common.hpp"

namespace cfmip {

enum class VarKind { Continuous, Binary, Integer };
enum class Sense { LE, EQ, GE };

struct Variable {
  int id = -1;
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
  bool integral() const { return kind != VarKind::Continuous; }
};

struct Term {
  int var;
  double coef;
};

struct LinearConstraint {
  std::vector<Term> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
  std::string tag;
};

struct Objective {
  std::vector<Term> terms;  // minimised
  double constant = 0.0;
};

class MilpModel {
public:
  int add_variable(std::string name, VarKind kind, double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper))
      throw ModelError("variable '" + name + "' needs finite bounds");
    if (lower > upper) throw ModelError("variable '" + name + "' has lower > upper");
    if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
      throw ModelError("binary variable '" + name + "' must have bounds within [0,1]");
    const int id = static_cast<int>(vars_.size());
    vars_.push_back(Variable{id, std::move(name), kind, lower, upper});
    return id;
  }
  int add_continuous(std::string name, double lower, double upper) {
    return add_variable(std::move(name), VarKind::Continuous, lower, upper);
  }
  int add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0.0, 1.0); }
  int add_integer(std::string name, double lower, double upper) {
    return add_variable(std::move(name), VarKind::Integer, lower, upper);
  }

  /// Adds a row; repeated variables in `terms` are merged. Returns the row index.
  int add_constraint(std::vector<Term> terms, Sense sense, double rhs, std::string tag) {
    if (!std::isfinite(rhs)) throw ModelError("non-finite right-hand side in '" + tag + "'");
    LinearConstraint c{merge(std::move(terms), tag), sense, rhs, std::move(tag)};
    rows_.push_back(std::move(c));
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_objective(std::vector<Term> terms, double constant = 0.0) {
    if (!std::isfinite(constant)) throw ModelError("non-finite objective constant");
    obj_.terms = merge(std::move(terms), "objective");
    obj_.constant = constant;
  }

  void add_objective_term(int var, double coef) {
    check_term(Term{var, coef}, "objective");
    obj_.terms.push_back(Term{var, coef});
    obj_.terms = merge(std::move(obj_.terms), "objective");
  }
  void add_objective_constant(double c) { obj_.constant += c; }

  /// Intersects the bounds of `var` with [lower, upper]. The result may be empty,
  /// in which case the model is infeasible.
  void tighten_bounds(int var, double lower, double upper) {
    check_var(var, "bounds");
    auto& v = vars_[static_cast<std::size_t>(var)];
    v.lower = std::max(v.lower, lower);
    v.upper = std::min(v.upper, upper);
  }
  void fix(int var, double value) { tighten_bounds(var, value, value); }

  const std::vector<Variable>& variables() const { return vars_; }
  const Variable& variable(int id) const { return vars_.at(static_cast<std::size_t>(id)); }
  const std::vector<LinearConstraint>& constraints() const { return rows_; }
  const Objective& objective() const { return obj_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }

  bool has_empty_domain() const {
    return std::any_of(vars_.begin(), vars_.end(), [](const Variable& v) { return v.lower > v.upper; });
  }

  std::set<std::string> tag_groups() const {
    std::set<std::string> out;
    for (const auto& c : rows_) out.insert(tag_group(c.tag));
    return out;
  }

  /// "embedding:relu_net" -> "embedding"
  static std::string tag_group(const std::string& tag) { return tag.substr(0, tag.find(':')); }

  double evaluate_objective(const std::vector<double>& x) const {
    double s = obj_.constant;
    for (const auto& t : obj_.terms) s += t.coef * x[static_cast<std::size_t>(t.var)];
    return s;
  }

private:
  void check_var(int var, const std::string& where) const {
    if (var < 0 || static_cast<std::size_t>(var) >= vars_.size())
      throw ModelError("unknown variable id " + std::to_string(var) + " in '" + where + "'");
  }
  void check_term(const Term& t, const std::string& where) const {
    check_var(t.var, where);
    if (!std::isfinite(t.coef)) throw ModelError("non-finite coefficient in '" + where + "'");
  }
  std::vector<Term> merge(std::vector<Term> terms, const std::string& where) const {
    for (const auto& t : terms) check_term(t, where);
    std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> out;
    for (const auto& t : terms) {
      if (!out.empty() && out.back().var == t.var)
        out.back().coef += t.coef;
      else
        out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Term& t) { return t.coef == 0.0; }), out.end());
    return out;
  }

  std::vector<Variable> vars_;
  std::vector<LinearConstraint> rows_;
  Objective obj_;
};

/// a >= u - ref and a >= ref - u: `a` bounds |u - ref| from above and equals it
/// at an optimum that penalises `a`.
inline std::pair<int, int> add_abs_link(MilpModel& m, int u, int a, double ref, const std::string& tag = "proximity") {
  const int r1 = m.add_constraint({{a, 1.0}, {u, -1.0}}, Sense::GE, -ref, tag);
  const int r2 = m.add_constraint({{a, 1.0}, {u, 1.0}}, Sense::GE, ref, tag);
  return {r1, r2};
}

struct PwlEpigraph {
  int value_var = -1;          // t >= f(var)
  std::vector<int> rows;       // one per segment
};

/// Epigraph t >= f(var) of a convex piecewise-linear function through the
/// sorted `breakpoints` (x, f(x)); segments are extended linearly beyond the ends.
inline PwlEpigraph add_pwl_penalty(MilpModel& m, int var, const std::vector<std::pair<double, double>>& breakpoints,
                                   const std::string& tag = "proximity") {
  if (breakpoints.size() < 2) throw ModelError("piecewise-linear penalty needs at least two breakpoints");
  std::vector<double> slopes;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double dx = breakpoints[k + 1].first - breakpoints[k].first;
    if (!(dx > 0)) throw ModelError("piecewise-linear breakpoints must be strictly increasing");
    slopes.push_back((breakpoints[k + 1].second - breakpoints[k].second) / dx);
  }
  for (std::size_t k = 0; k + 1 < slopes.size(); ++k)
    if (slopes[k + 1] < slopes[k] - 1e-12)
      throw ModelError("piecewise-linear penalty must be convex (non-decreasing slopes)");

  const auto& v = m.variable(var);
  auto eval = [&](double x) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < slopes.size(); ++k)
      best = std::max(best, breakpoints[k].second + slopes[k] * (x - breakpoints[k].first));
    return best;
  };
  double lo = std::min(eval(v.lower), eval(v.upper));
  double hi = std::max(eval(v.lower), eval(v.upper));
  for (const auto& [bx, by] : breakpoints) {
    if (bx >= v.lower && bx <= v.upper) lo = std::min(lo, by);
  }
  PwlEpigraph out;
  out.value_var = m.add_continuous(v.name + "_pwl", lo, hi);
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    // t - slope*var >= f_k - slope*x_k
    out.rows.push_back(m.add_constraint({{out.value_var, 1.0}, {var, -slopes[k]}}, Sense::GE,
                                        breakpoints[k].second - slopes[k] * breakpoints[k].first, tag));
  }
  return out;
}

namespace detail {

inline std::string lp_name(const Variable& v, const std::map<std::string, int>& counts) {
  bool ok = !v.name.empty() && std::isalpha(static_cast<unsigned char>(v.name.front()));
  for (char c : v.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) ok = false;
  if (ok && counts.at(v.name) == 1 && v.name != "e" && v.name != "E") return v.name;
  return (ok ? v.name + "_" : std::string("v")) + std::to_string(v.id);
}

inline std::string lp_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void lp_terms(std::ostream& os, const std::vector<Term>& terms, const std::vector<std::string>& names) {
  if (terms.empty()) {
    os << " 0 " << names.front();
    return;
  }
  bool first = true;
  for (const auto& t : terms) {
    const double c = t.coef;
    if (first)
      os << (c < 0 ? " - " : " ");
    else
      os << (c < 0 ? " - " : " + ");
    const double a = std::abs(c);
    if (a != 1.0) os << lp_number(a) << " ";
    os << names[static_cast<std::size_t>(t.var)];
    first = false;
  }
}

}  // namespace detail

/// CPLEX-style LP text. Variables and rows keep model order; each row is
/// preceded by a comment carrying its criterion tag.
inline std::string export_lp(const MilpModel& m) {
  if (m.num_variables() == 0) throw ModelError("cannot export an empty model");
  std::map<std::string, int> counts;
  for (const auto& v : m.variables()) ++counts[v.name];
  std::vector<std::string> names;
  for (const auto& v : m.variables()) names.push_back(detail::lp_name(v, counts));

  std::ostringstream os;
  os << "\\ cfmip " << kVersion << " model: " << m.num_variables() << " variables, " << m.num_constraints()
     << " constraints\n";
  os << "Minimize\n obj:";
  detail::lp_terms(os, m.objective().terms, names);
  if (m.objective().constant != 0.0)
    os << (m.objective().constant < 0 ? " - " : " + ") << detail::lp_number(std::abs(m.objective().constant));
  os << "\nSubject To\n";
  std::size_t i = 0;
  for (const auto& c : m.constraints()) {
    os << "\\ tag: " << c.tag << "\n c" << i++ << ":";
    detail::lp_terms(os, c.terms, names);
    os << (c.sense == Sense::LE ? " <= " : c.sense == Sense::GE ? " >= " : " = ") << detail::lp_number(c.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : m.variables()) {
    if (v.lower == v.upper)
      os << " " << names[static_cast<std::size_t>(v.id)] << " = " << detail::lp_number(v.lower) << "\n";
    else
      os << " " << detail::lp_number(v.lower) << " <= " << names[static_cast<std::size_t>(v.id)]
         << " <= " << detail::lp_number(v.upper) << "\n";
  }
  std::vector<std::string> bins, gens;
  for (const auto& v : m.variables()) {
    if (v.kind == VarKind::Binary) bins.push_back(names[static_cast<std::size_t>(v.id)]);
    if (v.kind == VarKind::Integer) gens.push_back(names[static_cast<std::size_t>(v.id)]);
  }
  if (!bins.empty()) {
    os << "Binaries\n";
    for (const auto& b : bins) os << " " << b << "\n";
  }
  if (!gens.empty()) {
    os << "Generals\n";
    for (const auto& g : gens) os << " " << g << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace cfmip
