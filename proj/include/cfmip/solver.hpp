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
 * @file solver.hpp
 * @brief Best-bound branch-and-bound over LP relaxations with an incumbent pool.
 *
 * Pool modes:
 *  - improving-only keeps every incumbent, i.e. each integer-feasible solution
 *    that improved on the best objective when it was found;
 *  - all-feasible keeps the pool_size best distinct integer-feasible solutions.
 *    Integral nodes are split further to exclude the solution just found, so
 *    the search can continue past the optimum until the pool is full.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "cfmip/common.hpp"
#include "cfmip/milp.hpp"
#include "cfmip/simplex.hpp"

namespace cfmip {

enum class PoolMode { ImprovingOnly, AllFeasible };
enum class SolveStatus { Optimal, Feasible, Infeasible, Unbounded, Limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Limit: return "limit";
  }
  return "?";
}

inline const char* to_string(PoolMode m) { return m == PoolMode::ImprovingOnly ? "improving-only" : "all-feasible"; }

inline PoolMode parse_pool_mode(const std::string& s) {
  if (s == "improving-only") return PoolMode::ImprovingOnly;
  if (s == "all-feasible") return PoolMode::AllFeasible;
  throw ConfigError("unknown pool mode '" + s + "'");
}

struct SolveOptions {
  double gap_tol = 1e-6;
  double time_limit = 30.0;  // seconds
  long node_limit = 200000;
  int pool_size = 1;
  PoolMode pool_mode = PoolMode::ImprovingOnly;
  /// Variables on which pool entries must differ (beyond 1e-6). Empty: all variables.
  std::vector<int> distinct_vars;
  /// Integer variables used to split integral nodes in all-feasible mode. Empty: all integer variables.
  std::vector<int> enumerate_vars;
  std::ostream* log = nullptr;

  void validate() const {
    if (pool_size < 1) throw ConfigError("pool_size must be >= 1");
    if (!(gap_tol > 0)) throw ConfigError("gap tolerance must be > 0");
    if (!(time_limit > 0)) throw ConfigError("time limit must be > 0");
    if (node_limit < 1) throw ConfigError("node limit must be >= 1");
  }
};

struct PoolEntry {
  std::vector<double> values;
  double objective = 0.0;
  bool incumbent = false;  // improved on the best objective when found
  long node = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  double best_objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<PoolEntry> pool;  // ascending objective
  long nodes_explored = 0;
  double wall_time = 0.0;
  /// True when the pool holds entries that were not incumbents (all-feasible extension).
  bool pool_extended = false;
  /// Smallest node bound seen that was pruned or left open (for the bound-sandwich check).
  double root_bound = std::numeric_limits<double>::quiet_NaN();
};

struct ViolationReport {
  std::vector<double> row_violation;  // >= 0 per constraint
  double max_violation = 0.0;         // rows and bounds
  std::string max_violation_tag;
  double max_bound_violation = 0.0;
  double max_integrality = 0.0;

  bool feasible(double tol = kFeasTol) const {
    return max_violation <= tol && max_bound_violation <= tol && max_integrality <= tol;
  }
};

inline ViolationReport check_solution(const MilpModel& model, const std::vector<double>& x) {
  if (x.size() != model.num_variables())
    throw ModelError("assignment has " + std::to_string(x.size()) + " values, model has " +
                     std::to_string(model.num_variables()) + " variables");
  ViolationReport rep;
  for (const auto& c : model.constraints()) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    double v = 0.0;
    if (c.sense == Sense::LE) v = std::max(0.0, lhs - c.rhs);
    if (c.sense == Sense::GE) v = std::max(0.0, c.rhs - lhs);
    if (c.sense == Sense::EQ) v = std::abs(lhs - c.rhs);
    rep.row_violation.push_back(v);
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.max_violation_tag = c.tag;
    }
  }
  for (const auto& var : model.variables()) {
    const double xv = x[static_cast<std::size_t>(var.id)];
    rep.max_bound_violation = std::max({rep.max_bound_violation, var.lower - xv, xv - var.upper});
    if (var.integral()) rep.max_integrality = std::max(rep.max_integrality, std::abs(xv - std::round(xv)));
  }
  return rep;
}

namespace detail {

struct BbNode {
  std::vector<double> lower;
  std::vector<double> upper;
  double bound;
  std::uint64_t seq;
};

struct BbNodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

}  // namespace detail

/// Branch-and-bound with most-fractional branching (ties: lowest id) and
/// best-bound node selection (ties: FIFO). Deterministic for fixed inputs.
inline SolveResult solve_milp(const MilpModel& model, const SolveOptions& opt = {}) {
  opt.validate();
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

  const LpRelaxation lp(model);
  const std::size_t nv = model.num_variables();
  std::vector<int> int_vars;
  for (const auto& v : model.variables())
    if (v.integral()) int_vars.push_back(v.id);
  std::vector<int> enum_vars = opt.enumerate_vars.empty() ? int_vars : opt.enumerate_vars;
  std::sort(enum_vars.begin(), enum_vars.end());
  std::vector<int> key_vars = opt.distinct_vars;
  if (key_vars.empty())
    for (std::size_t j = 0; j < nv; ++j) key_vars.push_back(static_cast<int>(j));

  SolveResult res;
  double incumbent = std::numeric_limits<double>::infinity();

  auto gap_for = [&](double v) { return std::isfinite(v) ? opt.gap_tol * std::max(1.0, std::abs(v)) : 0.0; };
  auto pool_full = [&] { return static_cast<int>(res.pool.size()) >= opt.pool_size; };
  // Objective above which a node cannot contribute anything.
  auto cutoff = [&]() -> double {
    if (opt.pool_mode == PoolMode::ImprovingOnly) return incumbent - gap_for(incumbent);
    if (!pool_full()) return std::numeric_limits<double>::infinity();
    const double worst = res.pool.back().objective;
    return worst - 1e-9 * std::max(1.0, std::abs(worst));
  };
  auto distinct = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (int k : key_vars)
      if (std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) > 1e-6) return true;
    return false;
  };

  std::vector<double> lo = lp.lower(), up = lp.upper();
  for (int j : int_vars) {
    const auto u = static_cast<std::size_t>(j);
    lo[u] = std::ceil(lo[u] - 1e-9);
    up[u] = std::floor(up[u] + 1e-9);
  }

  std::priority_queue<detail::BbNode, std::vector<detail::BbNode>, detail::BbNodeOrder> open;
  std::uint64_t seq = 0;
  open.push(detail::BbNode{lo, up, -std::numeric_limits<double>::infinity(), seq++});
  bool limit_hit = false;
  bool unbounded = false;

  while (!open.empty()) {
    if (res.nodes_explored >= opt.node_limit || elapsed() > opt.time_limit) {
      limit_hit = true;
      break;
    }
    detail::BbNode node = open.top();
    open.pop();
    if (node.bound >= cutoff()) continue;
    ++res.nodes_explored;

    const LpResult rel = lp.solve(node.lower, node.upper);
    if (rel.status == LpStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (rel.status != LpStatus::Optimal) continue;
    if (res.nodes_explored == 1) res.root_bound = rel.objective;
    if (rel.objective >= cutoff()) continue;

    // Most fractional integer variable; ties resolved towards the lowest id.
    long branch = -1;
    double best_frac = 1e-6;
    for (int j : int_vars) {
      const double v = rel.x[static_cast<std::size_t>(j)];
      const double f = std::abs(v - std::round(v));
      if (f > best_frac + 1e-12) {
        best_frac = f;
        branch = j;
      }
    }

    if (branch >= 0) {
      const auto b = static_cast<std::size_t>(branch);
      const double v = rel.x[b];
      detail::BbNode down{node.lower, node.upper, rel.objective, seq++};
      down.upper[b] = std::floor(v);
      detail::BbNode upn{node.lower, node.upper, rel.objective, seq++};
      upn.lower[b] = std::ceil(v);
      open.push(std::move(down));
      open.push(std::move(upn));
      continue;
    }

    // Integral relaxation: polish continuous values with integers fixed.
    std::vector<double> flo = node.lower, fup = node.upper;
    for (int j : int_vars) {
      const auto u = static_cast<std::size_t>(j);
      flo[u] = fup[u] = std::round(rel.x[u]);
    }
    LpResult pol = lp.solve(flo, fup);
    if (pol.status != LpStatus::Optimal) pol = rel;
    for (int j : int_vars) pol.x[static_cast<std::size_t>(j)] = std::round(pol.x[static_cast<std::size_t>(j)]);
    const auto rep = check_solution(model, pol.x);
    const bool accepted_point = rep.feasible(kFeasTol);
    const double obj = model.evaluate_objective(pol.x);

    if (accepted_point && obj < cutoff()) {
      const bool improves = obj < incumbent - gap_for(incumbent);
      bool is_new = true;
      for (const auto& e : res.pool)
        if (!distinct(e.values, pol.x)) {
          is_new = false;
          break;
        }
      if (opt.pool_mode == PoolMode::ImprovingOnly) {
        if (improves) {
          res.pool.push_back(PoolEntry{pol.x, obj, true, res.nodes_explored});
          incumbent = obj;
        }
      } else if (is_new) {
        res.pool.push_back(PoolEntry{pol.x, obj, improves, res.nodes_explored});
        if (improves) incumbent = obj;
      }
      if (improves && opt.log)
        *opt.log << "incumbent node=" << res.nodes_explored << " objective=" << obj << " time=" << elapsed() << "s\n";
      std::stable_sort(res.pool.begin(), res.pool.end(),
                       [](const PoolEntry& a, const PoolEntry& b) { return a.objective < b.objective; });
      if (static_cast<int>(res.pool.size()) > opt.pool_size) res.pool.resize(static_cast<std::size_t>(opt.pool_size));
    }

    if (opt.pool_mode == PoolMode::AllFeasible) {
      // Partition "every other integer point of this node" into children: child k keeps
      // the first k-1 free variables at their current values and moves the k-th away.
      std::vector<double> clo = node.lower, cup = node.upper;
      for (int j : enum_vars) {
        const auto u = static_cast<std::size_t>(j);
        if (node.lower[u] == node.upper[u]) continue;
        const double v = pol.x[u];
        if (v - 1 >= node.lower[u]) {
          detail::BbNode c{clo, cup, rel.objective, seq++};
          c.upper[u] = v - 1;
          open.push(std::move(c));
        }
        if (v + 1 <= node.upper[u]) {
          detail::BbNode c{clo, cup, rel.objective, seq++};
          c.lower[u] = v + 1;
          open.push(std::move(c));
        }
        clo[u] = cup[u] = v;
      }
    }
  }

  res.wall_time = elapsed();
  if (!res.pool.empty()) res.best_objective = res.pool.front().objective;
  res.pool_extended = std::any_of(res.pool.begin(), res.pool.end(), [](const PoolEntry& e) { return !e.incumbent; });
  if (unbounded)
    res.status = SolveStatus::Unbounded;
  else if (limit_hit)
    res.status = SolveStatus::Limit;
  else
    res.status = res.pool.empty() ? SolveStatus::Infeasible : SolveStatus::Optimal;
  return res;
}

}  // namespace cfmip
