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
 * @file builder.hpp
 * @brief Assembles the counterfactual MILP from a factual instance, a trained
 * model, the training data and a criteria configuration.
 *
 * Decision variables live in the encoded space: one [0,1] column per numeric
 * feature and one binary per categorical level. Integer features get an extra
 * integer variable in original units tied to their scaled column.
 */
#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cfmip/common.hpp"
#include "cfmip/config.hpp"
#include "cfmip/data.hpp"
#include "cfmip/embed.hpp"
#include "cfmip/learners.hpp"
#include "cfmip/milp.hpp"

namespace cfmip {

/// Criterion groups that can be switched off when isolating an infeasibility.
enum class Group : unsigned { Validity = 1, Actionability = 2, Sparsity = 4, Manifold = 8, Causality = 16, User = 32, Coherence = 64 };

inline const char* group_name(Group g) {
  switch (g) {
    case Group::Validity: return "validity";
    case Group::Actionability: return "actionability";
    case Group::Sparsity: return "sparsity";
    case Group::Manifold: return "manifold";
    case Group::Causality: return "causality";
    case Group::User: return "user";
    case Group::Coherence: return "coherence";
  }
  return "?";
}

inline constexpr unsigned kAllGroups = 127;

struct CausalEmbedding {
  std::size_t endogenous = 0;  // feature index
  int output_var = -1;         // learned: mechanism output; explicit: -1
  double reference = 0.0;      // c(p̂) in scaled units (learned)
  int row = -1;
};

/// The assembled model plus the bookkeeping needed to read solutions back.
struct CeProblem {
  MilpModel model;
  std::vector<int> x;              // per encoded column
  std::vector<int> integer_vars;   // per feature, -1 unless integer kind
  std::vector<int> change;         // per feature sparsity indicator, -1 when absent
  EmbeddingArtifacts embedding;
  Vector factual;                  // encoded factual
  Target target;
  std::vector<std::size_t> manifold_rows;  // dataset rows behind the lambda variables
  std::vector<int> lambda;
  std::vector<int> slack_plus, slack_minus;
  std::vector<int> cluster_vars;
  std::vector<int> cluster_of;             // per manifold row
  std::vector<CausalEmbedding> causal;
  std::vector<std::string> warnings;
};

namespace detail {

inline double median(Vector v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Per-feature base distance weights in scaled space.
inline Vector base_weights(const FeatureSchema& schema, const Dataset& data, const CeConfig& cfg) {
  Vector w(schema.size(), 1.0);
  if (cfg.weighting == Weighting::Mad) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (!schema.feature(j).numeric()) continue;
      Vector col;
      for (const auto& r : data.encoded()) col.push_back(r[schema.offset(j)]);
      const double med = median(col);
      for (auto& v : col) v = std::abs(v - med);
      const double mad = median(col);
      w[j] = mad > 1e-9 ? 1.0 / mad : 1.0;
    }
  }
  for (const auto& [name, mult] : cfg.feature_weights) w[schema.index_of(name)] *= mult;
  return w;
}

/// Lloyd's algorithm with a seeded initialisation; returns the cluster of each row.
inline std::vector<int> kmeans(const std::vector<Vector>& rows, int k, std::uint64_t seed, int iterations = 50) {
  const std::size_t n = rows.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw ConfigError("cluster count must lie in [1, |I|]");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vector> centers;
  for (int c = 0; c < k; ++c) centers.push_back(rows[order[static_cast<std::size_t>(c)]]);
  std::vector<int> assign(n, 0);
  for (int it = 0; it < iterations; ++it) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = 0;
        for (std::size_t q = 0; q < rows[i].size(); ++q) {
          const double e = rows[i][q] - centers[static_cast<std::size_t>(c)][q];
          d += e * e;
        }
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      moved |= assign[i] != best;
      assign[i] = best;
    }
    std::vector<Vector> sum(static_cast<std::size_t>(k), Vector(rows.front().size(), 0.0));
    std::vector<double> cnt(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sum[static_cast<std::size_t>(assign[i])];
      for (std::size_t q = 0; q < s.size(); ++q) s[q] += rows[i][q];
      cnt[static_cast<std::size_t>(assign[i])] += 1;
    }
    for (int c = 0; c < k; ++c)
      if (cnt[static_cast<std::size_t>(c)] > 0)
        for (std::size_t q = 0; q < sum[0].size(); ++q)
          centers[static_cast<std::size_t>(c)][q] = sum[static_cast<std::size_t>(c)][q] / cnt[static_cast<std::size_t>(c)];
    if (!moved && it > 0) break;
  }
  return assign;
}

inline void check_acyclic(const std::vector<CausalRelation>& rels, const FeatureSchema& schema) {
  std::map<std::size_t, std::vector<std::size_t>> edges;  // parent -> children
  for (const auto& r : rels) {
    const auto e = schema.index_of(r.endogenous);
    for (const auto& p : r.parents) {
      const auto pj = schema.index_of(p);
      if (pj == e) throw ConfigError("feature '" + r.endogenous + "' cannot be its own parent");
      edges[pj].push_back(e);
    }
  }
  std::map<std::size_t, int> state;  // 1 visiting, 2 done
  std::function<void(std::size_t)> dfs = [&](std::size_t v) {
    state[v] = 1;
    for (auto w : edges[v]) {
      if (state[w] == 1) throw ConfigError("causal relations contain a cycle");
      if (state[w] == 0) dfs(w);
    }
    state[v] = 2;
  };
  for (const auto& [v, _] : edges)
    if (state[v] == 0) dfs(v);
}

/// Rows of the desired outcome: the target class, or targets inside the regression band.
/// With an exact hull (ε = 0) a column whose variable is pinned at or beyond
/// the extreme hull value forces every weight onto rows attaining that extreme.
/// Rows that can carry no weight in any solution are dropped, repeated to a fixed point.
inline std::vector<std::size_t> prune_exact_hull(std::vector<std::size_t> rows, const Dataset& data, const MilpModel& m,
                                                 const std::vector<int>& x) {
  bool changed = true;
  while (changed && !rows.empty()) {
    changed = false;
    for (std::size_t c = 0; c < x.size() && !rows.empty(); ++c) {
      const auto& v = m.variable(x[c]);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (auto r : rows) {
        lo = std::min(lo, data.encoded_row(r)[c]);
        hi = std::max(hi, data.encoded_row(r)[c]);
      }
      std::vector<std::size_t> keep;
      if (v.upper < lo || v.lower > hi) {
        // nothing in the hull is reachable
      } else if (v.upper <= lo && lo < hi) {
        for (auto r : rows)
          if (data.encoded_row(r)[c] == lo) keep.push_back(r);
      } else if (v.lower >= hi && lo < hi) {
        for (auto r : rows)
          if (data.encoded_row(r)[c] == hi) keep.push_back(r);
      } else {
        continue;
      }
      rows = std::move(keep);
      changed = true;
    }
  }
  return rows;
}

inline std::vector<std::size_t> desired_rows(const Dataset& data, const Target& t) {
  if (t.kind == Target::Kind::Class) return class_indices(data, static_cast<double>(t.cls));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.labels()[i];
    if ((t.kind == Target::Kind::AtMost && y <= t.value - t.margin) ||
        (t.kind == Target::Kind::AtLeast && y >= t.value + t.margin))
      idx.push_back(i);
  }
  if (idx.empty()) throw SchemaError("no rows carry the requested outcome; manifold region undefined");
  return idx;
}

}  // namespace detail

/// Resolves the validity target for a factual point.
inline Target resolve_target(const TrainedModel& model, const FeatureSchema& schema, const Vector& factual,
                             const CeConfig& cfg) {
  if (model.task == Task::Regression) {
    if (!cfg.regression_target) throw ConfigError("regression models need a target band (direction, value)");
    return *cfg.regression_target;
  }
  int cls = predict_positive(model, factual) ? 0 : 1;
  if (cfg.target_class) {
    const double v = schema.is_classification() ? schema.label_value(*cfg.target_class) : std::stod(*cfg.target_class);
    cls = static_cast<int>(v);
  }
  return Target::classify(cls, cfg.margin);
}

/// Effective actionability class of feature j after overrides.
inline Actionability effective_actionability(const FeatureSchema& schema, std::size_t j, const CeConfig& cfg) {
  auto it = cfg.actionability_overrides.find(schema.feature(j).name);
  return it == cfg.actionability_overrides.end() ? schema.feature(j).actionability : it->second;
}

/// Builds the CE model. `groups` masks criterion groups (all on by default);
/// the infeasibility report uses it to switch groups off.
inline CeProblem build(const Record& factual, const TrainedModel& model, const Dataset& data, const CeConfig& cfg,
                       unsigned groups = kAllGroups) {
  cfg.validate();
  const FeatureSchema& schema = data.schema();
  auto on = [&](Group g) { return (groups & static_cast<unsigned>(g)) != 0; };
  for (const auto& [name, _] : cfg.actionability_overrides) schema.index_of(name);
  for (const auto& [name, _] : cfg.transition_overrides) {
    const auto j = schema.index_of(name);
    if (!schema.feature(j).categorical()) throw ConfigError("transitions given for numeric feature '" + name + "'");
  }
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (effective_actionability(schema, j, cfg) == Actionability::Conditional && !schema.feature(j).categorical())
      throw ConfigError("conditional actionability needs a categorical feature ('" + schema.feature(j).name + "')");

  CeProblem P;
  bool clipped = false;
  P.factual = encode(factual, schema, &clipped);
  if (clipped) P.warnings.push_back("factual instance was clipped to the schema bounds");
  if (model.input_dim != schema.width())
    throw ModelError("model expects " + std::to_string(model.input_dim) + " inputs, schema encodes " +
                     std::to_string(schema.width()));
  P.target = resolve_target(model, schema, P.factual, cfg);
  if (satisfies(model, P.factual, P.target))
    P.warnings.push_back("factual instance already satisfies the target; the counterfactual may equal it");
  MilpModel& m = P.model;

  // Decision variables and domains.
  P.integer_vars.assign(schema.size(), -1);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    if (f.categorical()) {
      for (const auto& lv : f.levels) P.x.push_back(m.add_binary(f.name + "=" + lv));
      continue;
    }
    P.x.push_back(m.add_continuous(f.name, 0.0, 1.0));
    if (f.kind == FeatureKind::Integer) {
      const double lo = std::ceil(f.lower - 1e-9), hi = std::floor(f.upper + 1e-9);
      const int k = m.add_integer(f.name + "_int", lo, hi);
      P.integer_vars[j] = k;
      // (hi - lo) x - k = -lo, in original units
      m.add_constraint({{P.x.back(), f.upper - f.lower}, {k, -1.0}}, Sense::EQ, -f.lower, "domain:" + f.name);
    }
  }
  auto col = [&](std::size_t j, std::size_t k = 0) { return P.x[schema.offset(j) + k]; };
  auto xhat = [&](std::size_t j, std::size_t k = 0) { return P.factual[schema.offset(j) + k]; };

  // Actionability: tightened bounds plus tagged rows.
  if (cfg.actionability && on(Group::Actionability)) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema.feature(j);
      const auto a = effective_actionability(schema, j, cfg);
      const std::string tag = "actionability:" + f.name;
      switch (a) {
        case Actionability::Free: break;
        case Actionability::Immutable:
          for (std::size_t k = 0; k < f.width(); ++k) {
            m.fix(col(j, k), xhat(j, k));
            m.add_constraint({{col(j, k), 1.0}}, Sense::EQ, xhat(j, k), tag);
          }
          break;
        case Actionability::NonDecreasing:
          m.tighten_bounds(col(j), xhat(j), 1.0);
          m.add_constraint({{col(j), 1.0}}, Sense::GE, xhat(j), tag);
          break;
        case Actionability::NonIncreasing:
          m.tighten_bounds(col(j), 0.0, xhat(j));
          m.add_constraint({{col(j), 1.0}}, Sense::LE, xhat(j), tag);
          break;
        case Actionability::NonNegative:
          if (f.lower < 0) {
            const double s0 = scale_value(0.0, f);
            m.tighten_bounds(col(j), s0, 1.0);
            m.add_constraint({{col(j), 1.0}}, Sense::GE, s0, tag);
          }
          break;
        case Actionability::Conditional: {
          const std::string& from = f.levels[static_cast<std::size_t>(
              std::max_element(P.factual.begin() + static_cast<long>(schema.offset(j)),
                               P.factual.begin() + static_cast<long>(schema.offset(j) + f.width())) -
              (P.factual.begin() + static_cast<long>(schema.offset(j))))];
          auto transitions = f.allowed_transitions;
          if (auto it = cfg.transition_overrides.find(f.name); it != cfg.transition_overrides.end())
            transitions = it->second;
          std::set<std::string> allowed{from};
          if (auto it = transitions.find(from); it != transitions.end())
            allowed.insert(it->second.begin(), it->second.end());
          for (std::size_t k = 0; k < f.width(); ++k) {
            if (allowed.count(f.levels[k])) continue;
            m.fix(col(j, k), 0.0);
            m.add_constraint({{col(j, k), 1.0}}, Sense::EQ, 0.0, tag);
          }
          break;
        }
      }
    }
  }
  // Keep integer variables consistent with tightened scaled bounds.
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (P.integer_vars[j] < 0) continue;
    const auto& f = schema.feature(j);
    const auto& v = m.variable(col(j));
    m.tighten_bounds(P.integer_vars[j], std::ceil(unscale_value(v.lower, f) - 1e-9),
                     std::floor(unscale_value(v.upper, f) + 1e-9));
  }

  // Coherence.
  if (cfg.coherence && on(Group::Coherence)) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema.feature(j);
      if (!f.categorical()) continue;
      std::vector<Term> t;
      for (std::size_t k = 0; k < f.width(); ++k) t.push_back({col(j, k), 1.0});
      m.add_constraint(std::move(t), Sense::EQ, 1.0, "coherence:" + f.name);
    }
  }

  // Model embedding and validity.
  P.embedding = embed_model(m, model, P.x, "h_");
  if (on(Group::Validity)) validity_constraint(m, P.embedding, model, P.target);

  // Proximity objective.
  const Vector w = detail::base_weights(schema, data, cfg);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    if (f.categorical()) {
      // Half the group's |x - x̂| sum (x̂=1 -> 1-x, x̂=0 -> x): a level switch costs w once.
      const double h = 0.5 * w[j];
      for (std::size_t k = 0; k < f.width(); ++k) {
        if (xhat(j, k) > 0.5) {
          m.add_objective_term(col(j, k), -h);
          m.add_objective_constant(h);
        } else {
          m.add_objective_term(col(j, k), h);
        }
      }
      continue;
    }
    const auto& v = m.variable(col(j));
    if (v.upper - v.lower <= 0) continue;
    if (cfg.distance == DistanceKind::L1) {
      const int d = m.add_continuous(f.name + "_dist", 0.0, 1.0);
      add_abs_link(m, col(j), d, xhat(j), "proximity:" + f.name);
      m.add_objective_term(d, w[j]);
    } else {
      std::vector<double> pts;
      const int B = cfg.pwl_breakpoints;
      for (int b = 0; b < B; ++b) pts.push_back(v.lower + (v.upper - v.lower) * b / (B - 1));
      pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return std::abs(p - xhat(j)) < 1e-9; }),
                pts.end());
      pts.push_back(std::clamp(xhat(j), v.lower, v.upper));
      std::sort(pts.begin(), pts.end());
      std::vector<std::pair<double, double>> bp;
      for (double p : pts) bp.emplace_back(p, (p - xhat(j)) * (p - xhat(j)));
      const auto e = add_pwl_penalty(m, col(j), bp, "proximity:" + f.name);
      m.add_objective_term(e.value_var, w[j]);
    }
  }

  // Sparsity.
  P.change.assign(schema.size(), -1);
  if (cfg.sparsity != SparsityMode::Off && on(Group::Sparsity)) {
    std::vector<Term> count;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema.feature(j);
      const int z = m.add_binary(f.name + "_changed");
      P.change[j] = z;
      count.push_back({z, 1.0});
      const std::string tag = "sparsity:" + f.name;
      if (f.categorical()) {
        for (std::size_t k = 0; k < f.width(); ++k) {
          if (xhat(j, k) > 0.5)
            m.add_constraint({{z, 1.0}, {col(j, k), 1.0}}, Sense::GE, 1.0, tag);  // z >= 1 - x_k
          else
            m.add_constraint({{z, 1.0}, {col(j, k), -1.0}}, Sense::GE, 0.0, tag);  // z >= x_k
        }
      } else {
        const auto& v = m.variable(col(j));
        const double M = std::max(v.upper - xhat(j), xhat(j) - v.lower);
        if (M <= 0) {
          m.fix(z, 0.0);
          continue;
        }
        m.add_constraint({{col(j), 1.0}, {z, -M}}, Sense::LE, xhat(j), tag);
        m.add_constraint({{col(j), 1.0}, {z, M}}, Sense::GE, xhat(j), tag);
      }
      if (cfg.sparsity == SparsityMode::Penalty) m.add_objective_term(z, cfg.alpha);
    }
    if (cfg.sparsity == SparsityMode::Hard)
      m.add_constraint(count, Sense::LE, static_cast<double>(cfg.max_changes), "sparsity:count");
  }

  // Data manifold.
  if (cfg.manifold != ManifoldMode::Off && on(Group::Manifold)) {
    const auto rows = detail::desired_rows(data, P.target);
    // Identical encoded rows contribute the same hull vertex; keep the first.
    std::set<Vector> seen;
    for (auto i : rows)
      if (seen.insert(data.encoded_row(i)).second) P.manifold_rows.push_back(i);
    const std::size_t n = schema.width();
    const bool hard = cfg.manifold == ManifoldMode::Hard || cfg.manifold == ManifoldMode::Clustered;
    const bool exact = hard && cfg.epsilon == 0.0;
    if (exact) P.manifold_rows = detail::prune_exact_hull(P.manifold_rows, data, m, P.x);
    if (P.manifold_rows.empty()) {
      // No hull vertex is compatible with the variable bounds; keep one so the
      // conflict surfaces as an infeasible manifold group.
      P.manifold_rows.push_back(rows.front());
    }
    std::vector<std::vector<Term>> eq(n);
    std::vector<Term> simplex;
    for (std::size_t r = 0; r < P.manifold_rows.size(); ++r) {
      const int lam = m.add_continuous("lambda_" + std::to_string(P.manifold_rows[r]), 0.0, 1.0);
      P.lambda.push_back(lam);
      simplex.push_back({lam, 1.0});
      const auto& xr = data.encoded_row(P.manifold_rows[r]);
      for (std::size_t c = 0; c < n; ++c)
        if (xr[c] != 0.0) eq[c].push_back({lam, xr[c]});
    }
    const double sbound = hard && cfg.p_infinity ? std::min(1.0, cfg.epsilon) : 1.0;
    std::vector<Term> norm;
    for (std::size_t c = 0; c < n; ++c) {
      auto t = eq[c];
      t.push_back({P.x[c], -1.0});
      if (exact) {
        // ε = 0: the slack is identically zero, so it is left out.
        m.add_constraint(std::move(t), Sense::EQ, 0.0, "manifold:hull");
        continue;
      }
      const int sp = m.add_continuous("s+_" + std::to_string(c), 0.0, sbound);
      const int sm = m.add_continuous("s-_" + std::to_string(c), 0.0, sbound);
      P.slack_plus.push_back(sp);
      P.slack_minus.push_back(sm);
      t.push_back({sp, -1.0});
      t.push_back({sm, 1.0});
      m.add_constraint(std::move(t), Sense::EQ, 0.0, "manifold:hull");
      norm.push_back({sp, 1.0});
      norm.push_back({sm, 1.0});
      if (hard && cfg.p_infinity) {
        m.add_constraint({{sp, 1.0}}, Sense::LE, cfg.epsilon, "manifold:ball");
        m.add_constraint({{sm, 1.0}}, Sense::LE, cfg.epsilon, "manifold:ball");
      }
      if (cfg.manifold == ManifoldMode::Soft) {
        m.add_objective_term(sp, cfg.beta);
        m.add_objective_term(sm, cfg.beta);
      }
    }
    m.add_constraint(simplex, Sense::EQ, 1.0, "manifold:convexity");
    if (hard && !cfg.p_infinity && !exact) m.add_constraint(norm, Sense::LE, cfg.epsilon, "manifold:ball");
    if (cfg.manifold == ManifoldMode::Clustered) {
      std::vector<Vector> pts;
      for (auto i : P.manifold_rows) pts.push_back(data.encoded_row(i));
      const int k = std::min<int>(cfg.clusters, static_cast<int>(pts.size()));
      P.cluster_of = detail::kmeans(pts, k, cfg.cluster_seed);
      std::vector<Term> pick;
      for (int c = 0; c < k; ++c) {
        P.cluster_vars.push_back(m.add_binary("cluster_" + std::to_string(c)));
        pick.push_back({P.cluster_vars.back(), 1.0});
      }
      m.add_constraint(pick, Sense::EQ, 1.0, "manifold:cluster");
      for (std::size_t r = 0; r < P.lambda.size(); ++r)
        m.add_constraint({{P.lambda[r], 1.0}, {P.cluster_vars[static_cast<std::size_t>(P.cluster_of[r])], -1.0}},
                         Sense::LE, 0.0, "manifold:cluster");
    }
  }

  // Causality.
  if (!cfg.causality.empty() && on(Group::Causality)) {
    detail::check_acyclic(cfg.causality, schema);
    for (std::size_t ri = 0; ri < cfg.causality.size(); ++ri) {
      const auto& rel = cfg.causality[ri];
      CausalEmbedding ce;
      ce.endogenous = schema.index_of(rel.endogenous);
      const auto& fe = schema.feature(ce.endogenous);
      if (!fe.numeric()) throw ConfigError("endogenous feature '" + rel.endogenous + "' must be numeric");
      const std::string tag = "causality:" + rel.endogenous;
      if (rel.mechanism == CausalRelation::Mechanism::ExplicitLinear) {
        if (rel.coefficients.size() != rel.parents.size())
          throw ConfigError("causal relation for '" + rel.endogenous + "' needs one coefficient per parent");
        // (hi_e - lo_e)(x_e - x̂_e) = sum a_k (hi_k - lo_k)(x_k - x̂_k)
        const double re = fe.upper - fe.lower;
        std::vector<Term> t{{col(ce.endogenous), re}};
        double rhs = re * xhat(ce.endogenous);
        for (std::size_t k = 0; k < rel.parents.size(); ++k) {
          const auto pj = schema.index_of(rel.parents[k]);
          const auto& fp = schema.feature(pj);
          if (!fp.numeric()) throw ConfigError("explicit causal parents must be numeric");
          const double c = rel.coefficients[k] * (fp.upper - fp.lower);
          t.push_back({col(pj), -c});
          rhs -= c * xhat(pj);
        }
        ce.row = m.add_constraint(std::move(t), Sense::EQ, rhs, tag);
      } else {
        if (!rel.model) throw ConfigError("learned causal relation for '" + rel.endogenous + "' has no model");
        std::vector<int> px;
        Vector phat;
        for (const auto& p : rel.parents) {
          const auto pj = schema.index_of(p);
          for (std::size_t k = 0; k < schema.feature(pj).width(); ++k) {
            px.push_back(col(pj, k));
            phat.push_back(xhat(pj, k));
          }
        }
        const auto art = embed_model(m, *rel.model, px, "c" + std::to_string(ri) + "_");
        ce.output_var = art.output_var;
        ce.reference = score(*rel.model, phat);
        // x_e - c(p) = x̂_e - c(p̂)
        ce.row = m.add_constraint({{col(ce.endogenous), 1.0}, {art.output_var, -1.0}}, Sense::EQ,
                                  xhat(ce.endogenous) - ce.reference, tag);
      }
      P.causal.push_back(ce);
    }
  }

  // User constraints in original units.
  if (on(Group::User)) {
    for (std::size_t u = 0; u < cfg.extra_constraints.size(); ++u) {
      const auto& uc = cfg.extra_constraints[u];
      std::vector<Term> t;
      double rhs = uc.rhs;
      for (const auto& [name, coef] : uc.terms) {
        const auto eqpos = name.find('=');
        if (eqpos != std::string::npos) {
          const auto j = schema.index_of(name.substr(0, eqpos));
          const auto li = schema.feature(j).level_index(name.substr(eqpos + 1));
          if (!li) throw ConfigError("unknown level in user constraint term '" + name + "'");
          t.push_back({col(j, *li), coef});
        } else {
          const auto j = schema.index_of(name);
          const auto& f = schema.feature(j);
          if (!f.numeric()) throw ConfigError("categorical feature '" + name + "' needs a feature=level term");
          t.push_back({col(j), coef * (f.upper - f.lower)});
          rhs -= coef * f.lower;
        }
      }
      m.add_constraint(std::move(t), uc.sense, rhs, "user:" + std::to_string(u));
    }
  }
  return P;
}

}  // namespace cfmip
