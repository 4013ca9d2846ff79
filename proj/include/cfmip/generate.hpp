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
 * @file generate.hpp
 * @brief Counterfactual generation: solve, read back, validate natively.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfmip/builder.hpp"
#include "cfmip/solver.hpp"

namespace cfmip {

/// Smallest change that the tight indicators of the feature-exclusion strategy
/// treat as a change (scaled units).
inline constexpr double kTightChange = 1e-5;

struct ManifoldCertificate {
  std::vector<std::pair<std::size_t, double>> lambda;  // (dataset row, weight), weight > 1e-9
  Vector slack;                                         // s = Σλx̄ - x per column
  double slack_l1 = 0.0;
  double slack_linf = 0.0;
  double lambda_sum = 0.0;
  int cluster = -1;
};

struct Counterfactual {
  Record record;
  Vector encoded;
  std::vector<bool> changed;  // per feature
  double objective = 0.0;
  double score = 0.0;
  bool valid = false;
  bool incumbent = true;
  std::optional<ManifoldCertificate> certificate;
  std::vector<double> causal_residuals;  // per relation, scaled units
};

struct CeResult {
  Record factual;
  Vector factual_encoded;
  double factual_score = 0.0;
  Target target;
  std::vector<Counterfactual> counterfactuals;
  SolveStatus status = SolveStatus::Infeasible;
  int requested = 1;
  bool partial = false;         // fewer than requested
  bool pool_extended = false;   // includes non-incumbent pool entries
  std::vector<std::string> infeasible_tags;
  std::vector<std::string> warnings;
  long nodes = 0;
  double wall_time = 0.0;
  std::size_t num_variables = 0;
  std::size_t num_constraints = 0;
};

/// Per-feature change flags: numerics beyond kChangeTol (scaled), categoricals on level change.
inline std::vector<bool> changed_features(const Vector& a, const Vector& b, const FeatureSchema& schema) {
  std::vector<bool> out(schema.size(), false);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    const std::size_t o = schema.offset(j);
    if (f.categorical()) {
      for (std::size_t k = 0; k < f.width(); ++k)
        if ((a[o + k] > 0.5) != (b[o + k] > 0.5)) out[j] = true;
    } else {
      out[j] = std::abs(a[o] - b[o]) > kChangeTol;
    }
  }
  return out;
}

namespace detail {

/// Reads the encoded point from a solution: binaries rounded, values within
/// 1e-9 of the factual snapped to it, integer features taken from their integer variable.
inline Vector read_point(const CeProblem& P, const FeatureSchema& schema, const std::vector<double>& sol) {
  Vector x(P.x.size());
  for (std::size_t c = 0; c < P.x.size(); ++c) {
    const auto& v = P.model.variable(P.x[c]);
    double val = sol[static_cast<std::size_t>(P.x[c])];
    if (v.kind == VarKind::Binary) val = std::round(val);
    val = std::clamp(val, 0.0, 1.0);
    if (std::abs(val - P.factual[c]) <= 1e-9) val = P.factual[c];
    x[c] = val;
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (P.integer_vars[j] < 0) continue;
    const auto& f = schema.feature(j);
    const double k = std::round(sol[static_cast<std::size_t>(P.integer_vars[j])]);
    const double s = scale_value(k, f);
    if (std::abs(s - x[schema.offset(j)]) > 1e-6) throw Error("integer feature '" + f.name + "' lost its scaled link");
    x[schema.offset(j)] = std::abs(s - P.factual[schema.offset(j)]) <= 1e-12 ? P.factual[schema.offset(j)] : s;
  }
  return x;
}

inline ManifoldCertificate certificate(const CeProblem& P, const Dataset& data, const std::vector<double>& sol,
                                       const Vector& x) {
  ManifoldCertificate c;
  Vector hull(x.size(), 0.0);
  for (std::size_t r = 0; r < P.lambda.size(); ++r) {
    const double l = std::max(0.0, sol[static_cast<std::size_t>(P.lambda[r])]);
    c.lambda_sum += l;
    if (l <= 1e-12) continue;
    if (l > 1e-9) c.lambda.emplace_back(P.manifold_rows[r], l);
    const auto& xr = data.encoded_row(P.manifold_rows[r]);
    for (std::size_t q = 0; q < x.size(); ++q) hull[q] += l * xr[q];
  }
  c.slack.resize(x.size());
  for (std::size_t q = 0; q < x.size(); ++q) {
    c.slack[q] = hull[q] - x[q];
    c.slack_l1 += std::abs(c.slack[q]);
    c.slack_linf = std::max(c.slack_linf, std::abs(c.slack[q]));
  }
  for (std::size_t k = 0; k < P.cluster_vars.size(); ++k)
    if (sol[static_cast<std::size_t>(P.cluster_vars[k])] > 0.5) c.cluster = static_cast<int>(k);
  return c;
}

inline std::vector<double> causal_residuals(const CeProblem& P, const CeConfig& cfg, const FeatureSchema& schema,
                                            const Vector& x) {
  std::vector<double> out;
  for (std::size_t r = 0; r < P.causal.size(); ++r) {
    const auto& rel = cfg.causality[r];
    const auto& ce = P.causal[r];
    const std::size_t e = schema.offset(ce.endogenous);
    if (rel.mechanism == CausalRelation::Mechanism::Learned) {
      Vector p;
      for (const auto& name : rel.parents) {
        const auto pj = schema.index_of(name);
        for (std::size_t k = 0; k < schema.feature(pj).width(); ++k) p.push_back(x[schema.offset(pj) + k]);
      }
      out.push_back(std::abs(x[e] - P.factual[e] - (score(*rel.model, p) - ce.reference)));
    } else {
      const auto& fe = schema.feature(ce.endogenous);
      double d = 0.0;
      for (std::size_t k = 0; k < rel.parents.size(); ++k) {
        const auto pj = schema.index_of(rel.parents[k]);
        const auto& fp = schema.feature(pj);
        d += rel.coefficients[k] * (fp.upper - fp.lower) * (x[schema.offset(pj)] - P.factual[schema.offset(pj)]);
      }
      out.push_back(std::abs((fe.upper - fe.lower) * (x[e] - P.factual[e]) - d) / (fe.upper - fe.lower));
    }
  }
  return out;
}

inline SolveOptions solve_options(const CeConfig& cfg, int pool_size, PoolMode mode) {
  SolveOptions o;
  o.gap_tol = cfg.gap_tol;
  o.time_limit = cfg.time_limit;
  o.node_limit = cfg.node_limit;
  o.pool_size = pool_size;
  o.pool_mode = mode;
  return o;
}

/// Tight per-feature change indicators: t_j = 1 exactly when feature j moves by
/// at least kTightChange (numerics) or switches level (categoricals).
inline std::vector<int> add_tight_changes(CeProblem& P, const FeatureSchema& schema) {
  MilpModel& m = P.model;
  std::vector<int> t(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    const std::string tag = "diversity:" + f.name;
    const std::size_t o = schema.offset(j);
    if (f.categorical()) {
      std::size_t hat = 0;
      for (std::size_t k = 0; k < f.width(); ++k)
        if (P.factual[o + k] > 0.5) hat = k;
      t[j] = m.add_binary(f.name + "_moved");
      m.add_constraint({{t[j], 1.0}, {P.x[o + hat], 1.0}}, Sense::EQ, 1.0, tag);
      continue;
    }
    const auto& v = m.variable(P.x[o]);
    const double xh = P.factual[o];
    const int up = m.add_binary(f.name + "_up");
    const int dn = m.add_binary(f.name + "_down");
    t[j] = m.add_binary(f.name + "_moved");
    m.add_constraint({{t[j], 1.0}, {up, -1.0}, {dn, -1.0}}, Sense::EQ, 0.0, tag);
    const double room_up = v.upper - xh, room_dn = xh - v.lower;
    if (room_up < kTightChange) m.fix(up, 0.0);
    if (room_dn < kTightChange) m.fix(dn, 0.0);
    const double M = 1.0 + kTightChange;
    // up: x - x̂ >= τ - M(1 - up);  down: x̂ - x >= τ - M(1 - dn);  |x - x̂| <= (up + dn)
    m.add_constraint({{P.x[o], 1.0}, {up, -M}}, Sense::GE, xh + kTightChange - M, tag);
    m.add_constraint({{P.x[o], -1.0}, {dn, -M}}, Sense::GE, -xh + kTightChange - M, tag);
    m.add_constraint({{P.x[o], 1.0}, {up, -1.0}}, Sense::LE, xh, tag);
    m.add_constraint({{P.x[o], 1.0}, {dn, 1.0}}, Sense::GE, xh, tag);
  }
  return t;
}

/// Requires the next solution to differ from `prev` by at least tau in some numeric
/// feature or to use a different level of some categorical feature.
inline void add_distance_cut(CeProblem& P, const FeatureSchema& schema, const Vector& prev, double tau, int round) {
  MilpModel& m = P.model;
  const std::string tag = "diversity:distance" + std::to_string(round);
  std::vector<Term> any;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    const std::size_t o = schema.offset(j);
    if (f.categorical()) {
      for (std::size_t k = 0; k < f.width(); ++k)
        if (prev[o + k] > 0.5) {
          const int d = m.add_binary(f.name + "_other" + std::to_string(round));
          m.add_constraint({{d, 1.0}, {P.x[o + k], 1.0}}, Sense::LE, 1.0, tag);  // d <= 1 - x_prev
          any.push_back({d, 1.0});
        }
      continue;
    }
    const auto& v = m.variable(P.x[o]);
    const double M = 1.0 + tau;
    if (v.upper - prev[o] >= tau) {
      const int d = m.add_binary(f.name + "_far_up" + std::to_string(round));
      m.add_constraint({{P.x[o], 1.0}, {d, -M}}, Sense::GE, prev[o] + tau - M, tag);
      any.push_back({d, 1.0});
    }
    if (prev[o] - v.lower >= tau) {
      const int d = m.add_binary(f.name + "_far_down" + std::to_string(round));
      m.add_constraint({{P.x[o], -1.0}, {d, -M}}, Sense::GE, -prev[o] + tau - M, tag);
      any.push_back({d, 1.0});
    }
  }
  m.add_constraint(any, Sense::GE, 1.0, tag);
}

}  // namespace detail

/// Groups active under a configuration, in the order the deletion filter tries them.
inline std::vector<Group> active_groups(const CeConfig& cfg) {
  std::vector<Group> g{Group::Validity};
  if (cfg.actionability) g.push_back(Group::Actionability);
  if (cfg.sparsity == SparsityMode::Hard) g.push_back(Group::Sparsity);
  if (cfg.manifold == ManifoldMode::Hard || cfg.manifold == ManifoldMode::Clustered) g.push_back(Group::Manifold);
  if (!cfg.causality.empty()) g.push_back(Group::Causality);
  if (!cfg.extra_constraints.empty()) g.push_back(Group::User);
  if (cfg.coherence) g.push_back(Group::Coherence);
  return g;
}

/// Deletion filter over criterion groups: drops every group whose removal keeps
/// the model infeasible. The survivors jointly conflict and each is needed.
inline std::vector<std::string> explain_infeasibility(const Record& factual, const TrainedModel& model,
                                                      const Dataset& data, const CeConfig& cfg) {
  const auto groups = active_groups(cfg);
  unsigned mask = 0;
  for (auto g : groups) mask |= static_cast<unsigned>(g);
  auto infeasible = [&](unsigned msk) {
    CeProblem P = build(factual, model, data, cfg, msk);
    if (P.model.has_empty_domain()) return true;
    auto opt = detail::solve_options(cfg, 1, PoolMode::ImprovingOnly);
    return solve_milp(P.model, opt).status == SolveStatus::Infeasible;
  };
  for (auto g : groups) {
    const unsigned trial = mask & ~static_cast<unsigned>(g);
    if (infeasible(trial)) mask = trial;
  }
  std::vector<std::string> tags;
  for (auto g : groups)
    if (mask & static_cast<unsigned>(g)) tags.push_back(group_name(g));
  if (tags.empty()) tags.push_back("embedding");
  return tags;
}

/// Builds, solves and decodes. Every returned counterfactual is re-checked with
/// check_solution() and the native model; failures are dropped with a warning.
/// Throws InfeasibleError when no solution exists, carrying the conflicting
/// criterion groups unless \p diagnose is false.
inline CeResult generate(const Record& factual, const TrainedModel& model, const Dataset& data, const CeConfig& cfg,
                         bool diagnose = true) {
  const FeatureSchema& schema = data.schema();
  CeProblem P = build(factual, model, data, cfg);
  CeResult R;
  R.factual = factual;
  R.factual_encoded = P.factual;
  R.factual_score = score(model, P.factual);
  R.target = P.target;
  R.requested = cfg.m;
  R.warnings = P.warnings;

  auto accept = [&](const CeProblem& prob, const std::vector<double>& sol, double obj, bool incumbent) -> bool {
    const auto rep = check_solution(prob.model, sol);
    if (!rep.feasible(kFeasTol)) {
      R.warnings.push_back("dropped a solution violating '" + rep.max_violation_tag + "' by " +
                           std::to_string(rep.max_violation));
      return false;
    }
    Counterfactual ce;
    ce.encoded = detail::read_point(prob, schema, sol);
    ce.record = decode(ce.encoded, schema);
    const Vector again = encode(ce.record, schema);
    ce.score = score(model, again);
    ce.valid = satisfies(model, again, P.target);
    if (!ce.valid) {
      R.warnings.push_back("dropped a solution that fails the native model check");
      return false;
    }
    ce.changed = changed_features(P.factual, ce.encoded, schema);
    ce.objective = obj;
    ce.incumbent = incumbent;
    if (!prob.lambda.empty()) ce.certificate = detail::certificate(prob, data, sol, ce.encoded);
    ce.causal_residuals = detail::causal_residuals(prob, cfg, schema, ce.encoded);
    for (const auto& other : R.counterfactuals) {
      const auto diff = changed_features(other.encoded, ce.encoded, schema);
      if (std::none_of(diff.begin(), diff.end(), [](bool b) { return b; })) return false;
    }
    R.counterfactuals.push_back(std::move(ce));
    return true;
  };
  auto record_stats = [&](const SolveResult& s) {
    R.nodes += s.nodes_explored;
    R.wall_time += s.wall_time;
  };

  R.num_variables = P.model.num_variables();
  R.num_constraints = P.model.num_constraints();

  if (cfg.diversity == DiversityMode::Pool) {
    auto opt = detail::solve_options(cfg, cfg.m, cfg.m > 1 ? cfg.pool_mode : PoolMode::ImprovingOnly);
    opt.distinct_vars = P.x;
    // Enumerate over change indicators when present so pool entries differ in what changes.
    for (int z : P.change)
      if (z >= 0) opt.enumerate_vars.push_back(z);
    const SolveResult s = P.model.has_empty_domain() ? SolveResult{} : solve_milp(P.model, opt);
    record_stats(s);
    R.status = s.status;
    R.pool_extended = s.pool_extended;
    for (const auto& e : s.pool) accept(P, e.values, e.objective, e.incumbent);
  } else {
    std::vector<int> tight;
    if (cfg.strategy == IterativeStrategy::FeatureExclusion) tight = detail::add_tight_changes(P, schema);
    const int rounds = cfg.strategy == IterativeStrategy::PerCluster ? static_cast<int>(P.cluster_vars.size()) : cfg.m;
    R.status = SolveStatus::Infeasible;
    for (int round = 0; round < rounds && static_cast<int>(R.counterfactuals.size()) < cfg.m; ++round) {
      CeProblem Q = P;  // per-cluster solves start from the base model each time
      CeProblem& cur = cfg.strategy == IterativeStrategy::PerCluster ? Q : P;
      if (cfg.strategy == IterativeStrategy::PerCluster) cur.model.fix(cur.cluster_vars[static_cast<std::size_t>(round)], 1.0);
      if (cur.model.has_empty_domain()) continue;
      const SolveResult s = solve_milp(cur.model, detail::solve_options(cfg, 1, PoolMode::ImprovingOnly));
      record_stats(s);
      if (round == 0 || R.status == SolveStatus::Infeasible) R.status = s.status;
      if (s.pool.empty()) {
        if (cfg.strategy == IterativeStrategy::PerCluster) continue;
        break;
      }
      const auto& sol = s.pool.front().values;
      const std::size_t before = R.counterfactuals.size();
      accept(cur, sol, s.pool.front().objective, true);
      if (cfg.strategy == IterativeStrategy::FeatureExclusion) {
        // No-good on the pattern of moved features.
        std::vector<Term> t;
        double rhs = 1.0;
        for (int v : tight) {
          if (std::round(sol[static_cast<std::size_t>(v)]) > 0.5) {
            t.push_back({v, -1.0});
            rhs -= 1.0;
          } else {
            t.push_back({v, 1.0});
          }
        }
        P.model.add_constraint(t, Sense::GE, rhs, "diversity:exclude" + std::to_string(round));
      } else if (cfg.strategy == IterativeStrategy::Distance) {
        const Vector prev = R.counterfactuals.size() > before ? R.counterfactuals.back().encoded
                                                              : detail::read_point(cur, schema, sol);
        detail::add_distance_cut(P, schema, prev, cfg.tau, round);
      }
    }
    R.num_variables = P.model.num_variables();
    R.num_constraints = P.model.num_constraints();
  }

  if (R.counterfactuals.empty()) {
    if (R.status == SolveStatus::Infeasible)
      throw InfeasibleError(diagnose ? explain_infeasibility(factual, model, data, cfg) : std::vector<std::string>{});
    if (R.status == SolveStatus::Limit) R.warnings.push_back("solver limit reached before any counterfactual was found");
  }
  R.partial = static_cast<int>(R.counterfactuals.size()) < cfg.m;
  if (R.partial)
    R.warnings.push_back("found " + std::to_string(R.counterfactuals.size()) + " of " + std::to_string(cfg.m) +
                         " requested counterfactuals");
  return R;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json target_to_json(const Target& t, const FeatureSchema& schema) {
  if (t.kind == Target::Kind::Class) {
    nlohmann::json j{{"class", t.cls}, {"margin", t.margin}};
    if (schema.is_classification()) j["label"] = schema.label_levels()[static_cast<std::size_t>(t.cls)];
    return j;
  }
  return {{"direction", t.kind == Target::Kind::AtMost ? "at-most" : "at-least"}, {"value", t.value}, {"margin", t.margin}};
}

inline nlohmann::json result_to_json(const CeResult& r, const FeatureSchema& schema) {
  nlohmann::json j;
  j["engine_version"] = kVersion;
  j["factual"] = record_to_json(r.factual, schema);
  j["factual_encoded"] = r.factual_encoded;
  j["factual_score"] = r.factual_score;
  j["target"] = target_to_json(r.target, schema);
  j["status"] = to_string(r.status);
  j["requested"] = r.requested;
  j["partial"] = r.partial;
  j["pool_extended"] = r.pool_extended;
  j["warnings"] = r.warnings;
  j["stats"] = {{"nodes", r.nodes}, {"wall_time", r.wall_time}, {"variables", r.num_variables},
                {"constraints", r.num_constraints}};
  j["counterfactuals"] = nlohmann::json::array();
  for (const auto& ce : r.counterfactuals) {
    nlohmann::json c;
    c["record"] = record_to_json(ce.record, schema);
    c["encoded"] = ce.encoded;
    nlohmann::json changed = nlohmann::json::array();
    for (std::size_t k = 0; k < ce.changed.size(); ++k)
      if (ce.changed[k]) changed.push_back(schema.feature(k).name);
    c["changed"] = changed;
    c["objective"] = ce.objective;
    c["score"] = ce.score;
    c["valid"] = ce.valid;
    c["incumbent"] = ce.incumbent;
    if (ce.certificate) {
      nlohmann::json lam = nlohmann::json::array();
      for (const auto& [row, w] : ce.certificate->lambda) lam.push_back({{"row", row}, {"weight", w}});
      c["manifold"] = {{"lambda", lam},
                       {"slack_l1", ce.certificate->slack_l1},
                       {"slack_linf", ce.certificate->slack_linf},
                       {"lambda_sum", ce.certificate->lambda_sum}};
      if (ce.certificate->cluster >= 0) c["manifold"]["cluster"] = ce.certificate->cluster;
    }
    if (!ce.causal_residuals.empty()) c["causal_residuals"] = ce.causal_residuals;
    j["counterfactuals"].push_back(std::move(c));
  }
  return j;
}

/// Reads the parts of a result needed for evaluation (records, target, factual).
inline CeResult result_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  CeResult r;
  try {
    r.factual = record_from_json(j.at("factual"), schema);
    r.factual_encoded = encode(r.factual, schema);
    const auto& t = j.at("target");
    if (t.contains("class"))
      r.target = Target::classify(t.at("class").get<int>(), t.value("margin", kDefaultMargin));
    else if (t.at("direction") == "at-most")
      r.target = Target::at_most(t.at("value").get<double>(), t.value("margin", kDefaultMargin));
    else
      r.target = Target::at_least(t.at("value").get<double>(), t.value("margin", kDefaultMargin));
    r.requested = j.value("requested", 1);
    r.partial = j.value("partial", false);
    for (const auto& c : j.at("counterfactuals")) {
      Counterfactual ce;
      ce.record = record_from_json(c.at("record"), schema);
      ce.encoded = encode(ce.record, schema);
      ce.changed = changed_features(r.factual_encoded, ce.encoded, schema);
      ce.objective = c.value("objective", 0.0);
      r.counterfactuals.push_back(std::move(ce));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("result JSON: ") + e.what());
  }
  return r;
}

}  // namespace cfmip
