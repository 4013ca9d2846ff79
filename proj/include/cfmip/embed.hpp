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
 * @file embed.hpp
 * @brief Compiles trained models into MILP constraints y = h(x).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cfmip/common.hpp"
#include "cfmip/learners.hpp"
#include "cfmip/milp.hpp"

namespace cfmip {

/// Offset separating the two sides of a tree split in scaled units.
inline constexpr double kSplitGap = 1e-6;
/// Default validity margin in score units.
inline constexpr double kDefaultMargin = 1e-4;

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct EmbeddingArtifacts {
  std::string family;
  int output_var = -1;
  std::vector<int> aux;
  /// Trees: leaf indicator ids and the matching node indices, one list per tree.
  std::vector<std::vector<int>> leaf_vars;
  std::vector<std::vector<int>> leaf_nodes;
  std::vector<int> tree_outputs;
  /// ReLU nets: pre-activation interval per layer and neuron.
  std::vector<std::vector<Interval>> bounds_trace;
  /// ReLU nets: activation variable per hidden neuron (-1 for stably inactive ones).
  std::vector<std::vector<int>> activations;
};

namespace detail {

inline Interval var_interval(const MilpModel& m, int v) { return {m.variable(v).lower, m.variable(v).upper}; }

inline Interval widen(Interval iv) {
  const double pad = 1e-9 * (1.0 + std::max(std::abs(iv.lower), std::abs(iv.upper)));
  return {iv.lower - pad, iv.upper + pad};
}

inline Interval affine_interval(const Vector& w, double b, const std::vector<Interval>& in) {
  Interval out{b, b};
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.lower += w[i] >= 0 ? w[i] * in[i].lower : w[i] * in[i].upper;
    out.upper += w[i] >= 0 ? w[i] * in[i].upper : w[i] * in[i].lower;
  }
  return out;
}

inline void check_inputs(const TrainedModel& model, const std::vector<int>& x_vars) {
  if (model.input_dim != 0 && model.input_dim != x_vars.size())
    throw ModelError("embedding expects " + std::to_string(model.input_dim) + " input variables, got " +
                     std::to_string(x_vars.size()));
}

}  // namespace detail

inline EmbeddingArtifacts embed_linear(MilpModel& m, const LinearModel& lin, const std::vector<int>& x_vars,
                                       const std::string& prefix = "") {
  if (lin.weights.size() != x_vars.size()) throw ModelError("linear embedding: dimension mismatch");
  std::vector<Interval> in;
  for (int v : x_vars) in.push_back(detail::var_interval(m, v));
  const auto yb = detail::widen(detail::affine_interval(lin.weights, lin.bias, in));
  EmbeddingArtifacts art;
  art.family = "linear";
  art.output_var = m.add_continuous(prefix + "y", yb.lower, yb.upper);
  std::vector<Term> t{{art.output_var, 1.0}};
  for (std::size_t i = 0; i < x_vars.size(); ++i) t.push_back({x_vars[i], -lin.weights[i]});
  m.add_constraint(std::move(t), Sense::EQ, lin.bias, "embedding:linear");
  return art;
}

namespace detail {

/// One tree: leaf indicators, path constraints and the output variable.
inline void embed_one_tree(MilpModel& m, const TreeModel& tree, const std::vector<int>& x_vars,
                           const std::string& name, const std::string& tag, EmbeddingArtifacts& art) {
  const auto leaves = tree.leaves();
  // Parent links for walking leaf-to-root.
  std::vector<int> parent(tree.nodes.size(), -1);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& nd = tree.nodes[i];
    if (nd.leaf()) continue;
    parent[static_cast<std::size_t>(nd.left)] = static_cast<int>(i);
    parent[static_cast<std::size_t>(nd.right)] = static_cast<int>(i);
  }
  double vmin = tree.nodes[static_cast<std::size_t>(leaves.front())].value, vmax = vmin;
  for (int l : leaves) {
    vmin = std::min(vmin, tree.nodes[static_cast<std::size_t>(l)].value);
    vmax = std::max(vmax, tree.nodes[static_cast<std::size_t>(l)].value);
  }
  const int y = m.add_continuous(name + "y", vmin, vmax);
  std::vector<int> zs;
  std::vector<Term> sum, link{{y, 1.0}};
  for (int l : leaves) {
    const int z = m.add_binary(name + "leaf" + std::to_string(l));
    zs.push_back(z);
    art.aux.push_back(z);
    sum.push_back({z, 1.0});
    link.push_back({z, -tree.nodes[static_cast<std::size_t>(l)].value});

    struct Cut {
      int col;
      bool left;
      double thr;
    };
    std::vector<Cut> path;
    for (int c = l; parent[static_cast<std::size_t>(c)] >= 0; c = parent[static_cast<std::size_t>(c)]) {
      const auto& p = tree.nodes[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
      path.push_back({p.column, p.left == c, p.threshold});
    }
    // The leaf's box inside the variable bounds; an empty box means the leaf is unreachable.
    bool empty = false;
    std::vector<std::pair<int, Interval>> box;
    for (const auto& cut : path) {
      if (cut.col < 0 || static_cast<std::size_t>(cut.col) >= x_vars.size())
        throw ModelError("tree split column out of range");
      const int xv = x_vars[static_cast<std::size_t>(cut.col)];
      auto it = std::find_if(box.begin(), box.end(), [&](const auto& b) { return b.first == xv; });
      if (it == box.end()) {
        box.emplace_back(xv, var_interval(m, xv));
        it = box.end() - 1;
      }
      if (cut.left)
        it->second.upper = std::min(it->second.upper, cut.thr);
      else
        it->second.lower = std::max(it->second.lower, cut.thr + kSplitGap);
      if (it->second.lower > it->second.upper + 1e-12) empty = true;
    }
    if (empty) {
      m.fix(z, 0.0);
      continue;
    }
    for (const auto& cut : path) {
      const int xv = x_vars[static_cast<std::size_t>(cut.col)];
      const auto iv = var_interval(m, xv);
      const double width = iv.upper - iv.lower;
      if (cut.left) {
        // x <= thr + M (1 - z)
        const double need = iv.upper - cut.thr;
        if (need <= 0) continue;  // always satisfied
        const double M = std::max(width, need);
        m.add_constraint({{xv, 1.0}, {z, M}}, Sense::LE, cut.thr + M, tag);
      } else {
        // x >= thr + gap - M (1 - z)
        const double need = cut.thr + kSplitGap - iv.lower;
        if (need <= 0) continue;
        const double M = std::max(width, need);
        m.add_constraint({{xv, 1.0}, {z, -M}}, Sense::GE, cut.thr + kSplitGap - M, tag);
      }
    }
  }
  m.add_constraint(sum, Sense::EQ, 1.0, tag);
  m.add_constraint(link, Sense::EQ, 0.0, tag);
  art.leaf_vars.push_back(zs);
  art.leaf_nodes.push_back(leaves);
  art.tree_outputs.push_back(y);
}

}  // namespace detail

inline EmbeddingArtifacts embed_tree(MilpModel& m, const TreeModel& tree, const std::vector<int>& x_vars,
                                     const std::string& prefix = "") {
  if (tree.nodes.empty()) throw ModelError("empty tree");
  EmbeddingArtifacts art;
  art.family = "tree";
  detail::embed_one_tree(m, tree, x_vars, prefix + "t0_", "embedding:tree", art);
  art.output_var = art.tree_outputs.front();
  return art;
}

inline EmbeddingArtifacts embed_ensemble(MilpModel& m, const EnsembleModel& ens, const std::vector<int>& x_vars,
                                         const std::string& prefix = "") {
  if (ens.trees.empty() || ens.trees.size() != ens.weights.size()) throw ModelError("malformed ensemble");
  EmbeddingArtifacts art;
  art.family = "ensemble";
  double lo = 0.0, hi = 0.0;
  for (std::size_t t = 0; t < ens.trees.size(); ++t) {
    detail::embed_one_tree(m, ens.trees[t], x_vars, prefix + "t" + std::to_string(t) + "_", "embedding:ensemble", art);
    const auto& v = m.variable(art.tree_outputs.back());
    const double w = ens.weights[t];
    lo += w >= 0 ? w * v.lower : w * v.upper;
    hi += w >= 0 ? w * v.upper : w * v.lower;
  }
  const auto yb = detail::widen({lo, hi});
  art.output_var = m.add_continuous(prefix + "y", yb.lower, yb.upper);
  std::vector<Term> t{{art.output_var, 1.0}};
  for (std::size_t k = 0; k < ens.trees.size(); ++k) t.push_back({art.tree_outputs[k], -ens.weights[k]});
  m.add_constraint(std::move(t), Sense::EQ, 0.0, "embedding:ensemble");
  return art;
}

/// Interval bounds of every pre-activation for inputs in the given boxes.
inline std::vector<std::vector<Interval>> relu_bounds(const ReluNet& net, std::vector<Interval> in) {
  std::vector<std::vector<Interval>> trace;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& L = net.layers[l];
    std::vector<Interval> pre;
    for (std::size_t o = 0; o < L.outputs(); ++o) {
      const auto iv = detail::widen(detail::affine_interval(L.weights[o], L.bias[o], in));
      if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper)) throw ModelError("non-finite neuron bound");
      pre.push_back(iv);
    }
    trace.push_back(pre);
    in.clear();
    for (const auto& iv : pre) in.push_back({std::max(0.0, iv.lower), std::max(0.0, iv.upper)});
  }
  return trace;
}

inline EmbeddingArtifacts embed_relunet(MilpModel& m, const ReluNet& net, const std::vector<int>& x_vars,
                                        const std::string& prefix = "") {
  if (net.layers.empty() || net.layers.front().inputs() != x_vars.size())
    throw ModelError("relu embedding: dimension mismatch");
  if (net.layers.back().outputs() != 1) throw ModelError("relu net must have a single output");
  const std::string tag = "embedding:relu_net";
  EmbeddingArtifacts art;
  art.family = "relu_net";
  std::vector<Interval> in;
  for (int v : x_vars) in.push_back(detail::var_interval(m, v));
  art.bounds_trace = relu_bounds(net, in);

  // Inputs of the current layer: variable id (or -1 for a constant zero).
  std::vector<int> cur = x_vars;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& L = net.layers[l];
    const bool last = l + 1 == net.layers.size();
    std::vector<int> next;
    for (std::size_t o = 0; o < L.outputs(); ++o) {
      const auto iv = art.bounds_trace[l][o];
      std::vector<Term> pre;  // sum w * input, bias goes to the rhs
      for (std::size_t i = 0; i < L.inputs(); ++i)
        if (cur[i] >= 0 && L.weights[o][i] != 0.0) pre.push_back({cur[i], L.weights[o][i]});
      const std::string nm = prefix + "h" + std::to_string(l) + "_" + std::to_string(o);
      if (last) {
        art.output_var = m.add_continuous(prefix + "y", iv.lower, iv.upper);
        auto t = pre;
        for (auto& term : t) term.coef = -term.coef;
        t.push_back({art.output_var, 1.0});
        m.add_constraint(std::move(t), Sense::EQ, L.bias[o], tag);
        next.push_back(art.output_var);
        continue;
      }
      // Bounds carry a 1e-9 safety pad, so stability is judged with a matching tolerance.
      const double stable_tol = 1e-8;
      if (iv.upper <= stable_tol) {  // never active
        next.push_back(-1);
        continue;
      }
      const bool always_on = iv.lower >= -stable_tol;
      const int a = m.add_continuous(nm, always_on ? std::min(0.0, iv.lower) : 0.0, iv.upper);
      art.aux.push_back(a);
      next.push_back(a);
      // a - pre
      std::vector<Term> diff{{a, 1.0}};
      for (const auto& t : pre) diff.push_back({t.var, -t.coef});
      if (always_on) {
        m.add_constraint(diff, Sense::EQ, L.bias[o], tag);
        continue;
      }
      const int b = m.add_binary(nm + "_on");
      art.aux.push_back(b);
      m.add_constraint(diff, Sense::GE, L.bias[o], tag);  // a >= pre
      auto upper = diff;                                     // a <= pre - L (1 - b)
      upper.push_back({b, -iv.lower});
      m.add_constraint(upper, Sense::LE, L.bias[o] - iv.lower, tag);
      m.add_constraint({{a, 1.0}, {b, -iv.upper}}, Sense::LE, 0.0, tag);  // a <= U b
    }
    if (!last) art.activations.push_back(next);
    cur = std::move(next);
  }
  return art;
}

/// Dispatches on the model family.
inline EmbeddingArtifacts embed_model(MilpModel& m, const TrainedModel& model, const std::vector<int>& x_vars,
                                      const std::string& prefix = "") {
  detail::check_inputs(model, x_vars);
  return std::visit(
      [&](const auto& p) -> EmbeddingArtifacts {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>)
          return embed_linear(m, p, x_vars, prefix);
        else if constexpr (std::is_same_v<T, TreeModel>)
          return embed_tree(m, p, x_vars, prefix);
        else if constexpr (std::is_same_v<T, EnsembleModel>)
          return embed_ensemble(m, p, x_vars, prefix);
        else
          return embed_relunet(m, p, x_vars, prefix);
      },
      model.params);
}

// ---------------------------------------------------------------------------
// Validity

/// Desired outcome. Classification targets name the class index (1 = positive);
/// regression targets bound the score away from a reference value.
struct Target {
  enum class Kind { Class, AtMost, AtLeast };
  Kind kind = Kind::Class;
  int cls = 1;
  double value = 0.0;
  double margin = kDefaultMargin;

  static Target classify(int cls, double margin = kDefaultMargin) { return {Kind::Class, cls, 0.0, margin}; }
  static Target at_most(double v, double margin) { return {Kind::AtMost, 0, v, margin}; }
  static Target at_least(double v, double margin) { return {Kind::AtLeast, 0, v, margin}; }
};

/// Native decision check of a point against the target (no margin for classes).
inline bool satisfies(const TrainedModel& model, const Vector& x, const Target& t) {
  const double s = score(model, x);
  switch (t.kind) {
    case Target::Kind::Class: return (s >= model.decision_threshold()) == (t.cls == 1);
    case Target::Kind::AtMost: return s <= t.value - t.margin + 1e-9;
    case Target::Kind::AtLeast: return s >= t.value + t.margin - 1e-9;
  }
  return false;
}

/// Adds the validity rows (tag "validity") and returns their indices.
inline std::vector<int> validity_constraint(MilpModel& m, const EmbeddingArtifacts& art, const TrainedModel& model,
                                            const Target& t) {
  if (t.margin < 0) throw ConfigError("validity margin must be >= 0");
  std::vector<int> rows;
  const int y = art.output_var;
  if (t.kind == Target::Kind::AtMost) {
    rows.push_back(m.add_constraint({{y, 1.0}}, Sense::LE, t.value - t.margin, "validity"));
    return rows;
  }
  if (t.kind == Target::Kind::AtLeast) {
    rows.push_back(m.add_constraint({{y, 1.0}}, Sense::GE, t.value + t.margin, "validity"));
    return rows;
  }
  if (t.cls != 0 && t.cls != 1) throw ConfigError("class target must be 0 or 1");
  const bool positive = t.cls == 1;
  if (const auto* tree = std::get_if<TreeModel>(&model.params)) {
    std::vector<Term> sum;
    for (std::size_t k = 0; k < art.leaf_nodes.front().size(); ++k) {
      const double v = tree->nodes[static_cast<std::size_t>(art.leaf_nodes.front()[k])].value;
      if ((v >= 0.5) == positive) sum.push_back({art.leaf_vars.front()[k], 1.0});
    }
    rows.push_back(m.add_constraint(sum, Sense::EQ, 1.0, "validity"));
    return rows;
  }
  const double thr = model.decision_threshold();
  if (positive)
    rows.push_back(m.add_constraint({{y, 1.0}}, Sense::GE, thr + t.margin, "validity"));
  else
    rows.push_back(m.add_constraint({{y, 1.0}}, Sense::LE, thr - t.margin, "validity"));
  return rows;
}

}  // namespace cfmip
