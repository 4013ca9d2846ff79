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
 * @file learners.hpp
 * @brief MIO-representable predictive models: training, scoring, gradients and JSON.
 *
 * All models consume vectors in the encoded space. Decision rules:
 *  - linear / relu-net: score >= 0 is the positive class;
 *  - tree / ensemble: leaves hold the positive-class fraction and
 *    score >= 0.5 is the positive class.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cfmip/common.hpp"
#include "cfmip/data.hpp"

namespace cfmip {

using Matrix = std::vector<Vector>;

enum class Task { Classification, Regression };
enum class LinearLoss { Logistic, Hinge };
enum class Family { LR, SVM, CART, RF, MLP };

inline Family parse_family(const std::string& s) {
  if (s == "lr") return Family::LR;
  if (s == "svm") return Family::SVM;
  if (s == "cart") return Family::CART;
  if (s == "rf") return Family::RF;
  if (s == "mlp") return Family::MLP;
  throw ConfigError("unknown model family '" + s + "' (expected lr|svm|cart|rf|mlp)");
}

inline std::string to_string(Family f) {
  switch (f) {
    case Family::LR: return "lr";
    case Family::SVM: return "svm";
    case Family::CART: return "cart";
    case Family::RF: return "rf";
    case Family::MLP: return "mlp";
  }
  return "?";
}

struct LinearModel {
  Vector weights;
  double bias = 0.0;
  LinearLoss loss = LinearLoss::Logistic;
};

struct TreeNode {
  int column = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  bool leaf() const { return column < 0; }
};

/// Binary tree stored as a node array; node 0 is the root. `x[column] <= threshold` goes left.
struct TreeModel {
  std::vector<TreeNode> nodes;

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].leaf()) out.push_back(static_cast<int>(i));
    return out;
  }
};

struct EnsembleModel {
  std::vector<TreeModel> trees;
  Vector weights;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;
  std::size_t inputs() const { return weights.empty() ? 0 : weights.front().size(); }
  std::size_t outputs() const { return weights.size(); }
};

/// ReLU on every layer except the last, which is affine with width 1.
struct ReluNet {
  std::vector<DenseLayer> layers;
};

struct TrainedModel {
  std::variant<LinearModel, TreeModel, EnsembleModel, ReluNet> params;
  Task task = Task::Classification;
  std::string trained_as;  // family tag used for training, informational
  double train_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::size_t input_dim = 0;

  bool is_linear() const { return std::holds_alternative<LinearModel>(params); }
  bool is_tree() const { return std::holds_alternative<TreeModel>(params); }
  bool is_ensemble() const { return std::holds_alternative<EnsembleModel>(params); }
  bool is_relunet() const { return std::holds_alternative<ReluNet>(params); }

  std::string kind_name() const {
    if (is_linear()) return "linear";
    if (is_tree()) return "tree";
    if (is_ensemble()) return "ensemble";
    return "relu_net";
  }

  /// Score threshold separating the classes for this family.
  double decision_threshold() const { return (is_tree() || is_ensemble()) ? 0.5 : 0.0; }
};

// ---------------------------------------------------------------------------
// Scoring

inline double score_tree(const TreeModel& t, const Vector& x) {
  if (t.nodes.empty()) throw ModelError("empty tree");
  int i = 0;
  while (!t.nodes[static_cast<std::size_t>(i)].leaf()) {
    const auto& nd = t.nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(nd.column)] <= nd.threshold ? nd.left : nd.right;
  }
  return t.nodes[static_cast<std::size_t>(i)].value;
}

/// Index of the leaf reached by x.
inline int tree_leaf(const TreeModel& t, const Vector& x) {
  int i = 0;
  while (!t.nodes[static_cast<std::size_t>(i)].leaf()) {
    const auto& nd = t.nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(nd.column)] <= nd.threshold ? nd.left : nd.right;
  }
  return i;
}

/// Pre-activations of every layer; the last entry holds the (1-element) output.
inline Matrix forward_preactivations(const ReluNet& net, const Vector& x) {
  Matrix pre;
  Vector act = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& L = net.layers[l];
    Vector z(L.outputs());
    for (std::size_t o = 0; o < L.outputs(); ++o) {
      double s = L.bias[o];
      for (std::size_t i = 0; i < L.inputs(); ++i) s += L.weights[o][i] * act[i];
      z[o] = s;
    }
    pre.push_back(z);
    if (l + 1 < net.layers.size())
      for (auto& v : z) v = std::max(0.0, v);
    act = std::move(z);
  }
  return pre;
}

inline double score(const TrainedModel& m, const Vector& x) {
  if (m.input_dim != 0 && x.size() != m.input_dim)
    throw ModelError("dimension mismatch: model expects " + std::to_string(m.input_dim) + " inputs, got " +
                     std::to_string(x.size()));
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          if (x.size() != p.weights.size()) throw ModelError("dimension mismatch");
          double s = p.bias;
          for (std::size_t i = 0; i < x.size(); ++i) s += p.weights[i] * x[i];
          return s;
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return score_tree(p, x);
        } else if constexpr (std::is_same_v<T, EnsembleModel>) {
          double s = 0.0;
          for (std::size_t t = 0; t < p.trees.size(); ++t) s += p.weights[t] * score_tree(p.trees[t], x);
          return s;
        } else {
          if (p.layers.empty()) throw ModelError("empty network");
          if (x.size() != p.layers.front().inputs()) throw ModelError("dimension mismatch");
          return forward_preactivations(p, x).back().front();
        }
      },
      m.params);
}

/// Native decision rule: true for the positive class (label 1).
inline bool predict_positive(const TrainedModel& m, const Vector& x) {
  return score(m, x) >= m.decision_threshold();
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(const TrainedModel& m) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        auto check_tree = [](const TreeModel& t) {
          if (t.nodes.empty()) throw ModelError("tree has no nodes");
          for (const auto& nd : t.nodes) {
            if (nd.leaf()) continue;
            auto ok = [&](int c) { return c > 0 && static_cast<std::size_t>(c) < t.nodes.size(); };
            if (!ok(nd.left) || !ok(nd.right)) throw ModelError("tree child index out of range");
          }
        };
        if constexpr (std::is_same_v<T, TreeModel>) {
          check_tree(p);
        } else if constexpr (std::is_same_v<T, EnsembleModel>) {
          if (p.trees.size() != p.weights.size()) throw ModelError("ensemble weights/trees mismatch");
          for (const auto& t : p.trees) check_tree(t);
          const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
          if (std::abs(sum - 1.0) > 1e-9) throw ModelError("ensemble weights must sum to 1");
        } else if constexpr (std::is_same_v<T, ReluNet>) {
          if (p.layers.empty()) throw ModelError("network has no layers");
          for (std::size_t l = 0; l < p.layers.size(); ++l) {
            const auto& L = p.layers[l];
            if (L.bias.size() != L.outputs()) throw ModelError("layer bias size mismatch");
            for (const auto& row : L.weights)
              if (row.size() != L.inputs()) throw ModelError("ragged weight matrix");
            if (l > 0 && L.inputs() != p.layers[l - 1].outputs())
              throw ModelError("layer dimensions do not chain");
          }
          if (p.layers.back().outputs() != 1) throw ModelError("final layer must have width 1");
        }
      },
      m.params);
}

// ---------------------------------------------------------------------------
// Losses and gradients

namespace detail {

inline double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

/// log(1 + exp(s)) without overflow.
inline double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

/// Loss and d(loss)/d(score) for the task: logistic for classification, half squared error for regression.
inline std::pair<double, double> output_loss(Task task, double s, double target) {
  if (task == Task::Classification) return {softplus(s) - target * s, sigmoid(s) - target};
  const double r = s - target;
  return {0.5 * r * r, r};
}

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Pointwise training loss of a differentiable model (linear or relu-net).
inline double loss(const TrainedModel& m, const Vector& x, double target) {
  return detail::output_loss(m.task, score(m, x), target).first;
}

/// Flattened parameter vector. Linear: weights then bias. ReLU net: per layer,
/// row-major weights followed by biases.
inline Vector flatten_params(const TrainedModel& m) {
  Vector out;
  if (const auto* lin = std::get_if<LinearModel>(&m.params)) {
    out = lin->weights;
    out.push_back(lin->bias);
  } else if (const auto* net = std::get_if<ReluNet>(&m.params)) {
    for (const auto& L : net->layers) {
      for (const auto& row : L.weights) out.insert(out.end(), row.begin(), row.end());
      out.insert(out.end(), L.bias.begin(), L.bias.end());
    }
  } else {
    throw ModelError("parameters are only defined for linear and relu-net models");
  }
  return out;
}

inline void assign_params(TrainedModel& m, const Vector& flat) {
  std::size_t k = 0;
  auto take = [&]() {
    if (k >= flat.size()) throw ModelError("parameter vector too short");
    return flat[k++];
  };
  if (auto* lin = std::get_if<LinearModel>(&m.params)) {
    for (auto& w : lin->weights) w = take();
    lin->bias = take();
  } else if (auto* net = std::get_if<ReluNet>(&m.params)) {
    for (auto& L : net->layers) {
      for (auto& row : L.weights)
        for (auto& w : row) w = take();
      for (auto& b : L.bias) b = take();
    }
  } else {
    throw ModelError("parameters are only defined for linear and relu-net models");
  }
  if (k != flat.size()) throw ModelError("parameter vector too long");
}

/// Exact gradient of loss(m, x, target) with respect to flatten_params(m).
inline Vector gradient(const TrainedModel& m, const Vector& x, double target) {
  if (const auto* lin = std::get_if<LinearModel>(&m.params)) {
    if (x.size() != lin->weights.size()) throw ModelError("dimension mismatch");
    const double g = detail::output_loss(m.task, score(m, x), target).second;
    Vector out(x.size() + 1);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = g * x[i];
    out.back() = g;
    return out;
  }
  const auto* net = std::get_if<ReluNet>(&m.params);
  if (!net) throw ModelError("gradient needs a linear or relu-net model");
  if (net->layers.empty() || x.size() != net->layers.front().inputs()) throw ModelError("dimension mismatch");

  const Matrix pre = forward_preactivations(*net, x);
  const std::size_t L = net->layers.size();
  std::vector<Vector> acts(L);  // input to each layer
  acts[0] = x;
  for (std::size_t l = 1; l < L; ++l) {
    acts[l] = pre[l - 1];
    for (auto& v : acts[l]) v = std::max(0.0, v);
  }
  std::vector<Matrix> dW(L);
  std::vector<Vector> db(L);
  Vector delta{detail::output_loss(m.task, pre.back().front(), target).second};
  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = net->layers[l];
    dW[l].assign(layer.outputs(), Vector(layer.inputs(), 0.0));
    db[l] = delta;
    for (std::size_t o = 0; o < layer.outputs(); ++o)
      for (std::size_t i = 0; i < layer.inputs(); ++i) dW[l][o][i] = delta[o] * acts[l][i];
    if (l == 0) break;
    Vector next(layer.inputs(), 0.0);
    for (std::size_t i = 0; i < layer.inputs(); ++i) {
      if (pre[l - 1][i] <= 0) continue;  // ReLU derivative, 0 at the kink
      double s = 0.0;
      for (std::size_t o = 0; o < layer.outputs(); ++o) s += layer.weights[o][i] * delta[o];
      next[i] = s;
    }
    delta = std::move(next);
  }
  Vector out;
  for (std::size_t l = 0; l < L; ++l) {
    for (const auto& row : dW[l]) out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), db[l].begin(), db[l].end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct Hyperparams {
  int epochs = 500;
  double learning_rate = 0.5;
  double l2 = 1e-3;               // svm regularisation; mlp weight decay when > 0
  int max_depth = 4;              // cart/rf
  int min_samples_leaf = 1;       // cart/rf
  int n_trees = 10;               // rf
  bool bootstrap = true;          // rf
  int max_features = 0;           // 0: all (cart) / sqrt(n) (rf)
  std::vector<int> hidden{10};    // mlp
  int batch_size = 32;            // mlp
  std::optional<Task> task;       // default: from dataset labels

  static Hyperparams from_json(const nlohmann::json& j) {
    Hyperparams h;
    h.epochs = j.value("epochs", h.epochs);
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.l2 = j.value("l2", h.l2);
    h.max_depth = j.value("max_depth", h.max_depth);
    h.min_samples_leaf = j.value("min_samples_leaf", h.min_samples_leaf);
    h.n_trees = j.value("n_trees", h.n_trees);
    h.bootstrap = j.value("bootstrap", h.bootstrap);
    h.max_features = j.value("max_features", h.max_features);
    h.hidden = j.value("hidden", h.hidden);
    h.batch_size = j.value("batch_size", h.batch_size);
    if (j.contains("task")) h.task = j.at("task") == "regression" ? Task::Regression : Task::Classification;
    return h;
  }
};

namespace detail {

inline void check_hyperparams(Family f, const Hyperparams& h) {
  if (h.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(h.learning_rate > 0)) throw ConfigError("learning rate must be > 0");
  if ((f == Family::CART || f == Family::RF) && h.max_depth < 1) throw ConfigError("tree max depth must be >= 1");
  if ((f == Family::CART || f == Family::RF) && h.min_samples_leaf < 1)
    throw ConfigError("min_samples_leaf must be >= 1");
  if (f == Family::RF && h.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (f == Family::MLP) {
    if (h.hidden.empty()) throw ConfigError("mlp needs at least one hidden layer");
    for (int w : h.hidden)
      if (w < 1) throw ConfigError("mlp hidden width must be >= 1");
    if (h.batch_size < 1) throw ConfigError("batch size must be >= 1");
  }
}

inline LinearModel train_linear(const Matrix& X, const Vector& y, LinearLoss kind, const Hyperparams& h) {
  const std::size_t n = X.empty() ? 0 : X.front().size();
  const double N = static_cast<double>(X.size());
  LinearModel m{Vector(n, 0.0), 0.0, kind};
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    Vector gw(n, 0.0);
    double gb = 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < X.size(); ++r) {
      double s = m.bias;
      for (std::size_t i = 0; i < n; ++i) s += m.weights[i] * X[r][i];
      double g = 0.0;
      if (kind == LinearLoss::Logistic) {
        total += softplus(s) - y[r] * s;
        g = sigmoid(s) - y[r];
      } else {
        const double t = y[r] > 0.5 ? 1.0 : -1.0;
        const double margin = t * s;
        if (margin < 1.0) {
          total += 1.0 - margin;
          g = -t;
        }
      }
      if (g == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) gw[i] += g * X[r][i];
      gb += g;
    }
    if (!std::isfinite(total)) throw TrainingDivergence(epoch);
    // Decaying step for the hinge subgradient keeps the iterates convergent.
    const double step = kind == LinearLoss::Hinge ? h.learning_rate / std::sqrt(1.0 + epoch) : h.learning_rate;
    for (std::size_t i = 0; i < n; ++i) {
      double g = gw[i] / N;
      if (kind == LinearLoss::Hinge) g += h.l2 * m.weights[i];
      m.weights[i] -= step * g;
    }
    m.bias -= step * gb / N;
  }
  return m;
}

struct TreeBuilder {
  const Matrix& X;
  const Vector& y;
  const Hyperparams& h;
  Task task;
  int max_features;
  std::mt19937_64* rng;  // null: consider every column
  TreeModel tree;

  double impurity(double sum, double sum_sq, double cnt) const {
    if (cnt <= 0) return 0.0;
    const double mean = sum / cnt;
    if (task == Task::Classification) return cnt * 2.0 * mean * (1.0 - mean);  // Gini times count
    return sum_sq - sum * mean;                                                  // SSE
  }

  int build(std::vector<std::size_t>& idx, int depth) {
    double sum = 0.0, sum_sq = 0.0;
    for (auto r : idx) {
      sum += y[r];
      sum_sq += y[r] * y[r];
    }
    const double cnt = static_cast<double>(idx.size());
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, sum / cnt});
    const double parent = impurity(sum, sum_sq, cnt);
    if (depth >= h.max_depth || idx.size() < 2 * static_cast<std::size_t>(h.min_samples_leaf) || parent <= 1e-12)
      return node;

    const std::size_t n = X.front().size();
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), 0);
    if (rng && max_features > 0 && static_cast<std::size_t>(max_features) < n) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(max_features); ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform01(*rng) * static_cast<double>(n - i));
        std::swap(cols[i], cols[std::min(j, n - 1)]);
      }
      cols.resize(static_cast<std::size_t>(max_features));
      std::sort(cols.begin(), cols.end());
    }

    // Zero-gain splits are accepted at impure nodes (XOR-shaped data needs them).
    double best_gain = -1.0;
    int best_col = -1;
    double best_thr = 0.0;
    std::vector<std::pair<double, double>> vals(idx.size());
    for (auto c : cols) {
      for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = {X[idx[k]][c], y[idx[k]]};
      std::sort(vals.begin(), vals.end());
      double ls = 0.0, lsq = 0.0;
      for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        ls += vals[k].second;
        lsq += vals[k].second * vals[k].second;
        if (vals[k].first == vals[k + 1].first) continue;
        const double lc = static_cast<double>(k + 1);
        const double rc = cnt - lc;
        if (lc < h.min_samples_leaf || rc < h.min_samples_leaf) continue;
        const double gain = parent - impurity(ls, lsq, lc) - impurity(sum - ls, sum_sq - lsq, rc);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_col = static_cast<int>(c);
          best_thr = 0.5 * (vals[k].first + vals[k + 1].first);
        }
      }
    }
    if (best_col < 0) return node;

    std::vector<std::size_t> left, right;
    for (auto r : idx) (X[r][static_cast<std::size_t>(best_col)] <= best_thr ? left : right).push_back(r);
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    nd.column = best_col;
    nd.threshold = best_thr;
    nd.left = l;
    nd.right = r;
    return node;
  }
};

inline TreeModel train_tree(const Matrix& X, const Vector& y, const std::vector<std::size_t>& rows,
                            const Hyperparams& h, Task task, int max_features, std::mt19937_64* rng) {
  TreeBuilder b{X, y, h, task, max_features, rng, {}};
  auto idx = rows;
  b.build(idx, 0);
  return std::move(b.tree);
}

inline ReluNet train_mlp(const Matrix& X, const Vector& y, const Hyperparams& h, Task task,
                         std::mt19937_64& rng) {
  ReluNet net;
  std::size_t in = X.front().size();
  std::vector<int> widths = h.hidden;
  widths.push_back(1);
  for (int w : widths) {
    DenseLayer L;
    const double bound = std::sqrt(6.0 / static_cast<double>(in));  // He-uniform
    L.weights.assign(static_cast<std::size_t>(w), Vector(in));
    for (auto& row : L.weights)
      for (auto& v : row) v = (2.0 * uniform01(rng) - 1.0) * bound;
    L.bias.assign(static_cast<std::size_t>(w), 0.0);
    net.layers.push_back(std::move(L));
    in = static_cast<std::size_t>(w);
  }
  TrainedModel tmp;
  tmp.params = net;
  tmp.task = task;
  Vector params = flatten_params(tmp);

  std::vector<std::size_t> order(X.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = static_cast<std::size_t>(h.batch_size);
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      Vector g(params.size(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const auto r = order[k];
        total += loss(tmp, X[r], y[r]);
        const Vector gr = gradient(tmp, X[r], y[r]);
        for (std::size_t p = 0; p < g.size(); ++p) g[p] += gr[p];
      }
      const double scale = h.learning_rate / static_cast<double>(stop - start);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= scale * g[p] + h.learning_rate * h.l2 * params[p];
      assign_params(tmp, params);
    }
    if (!std::isfinite(total)) throw TrainingDivergence(epoch);
  }
  return std::get<ReluNet>(tmp.params);
}

}  // namespace detail

/// Trains on an explicit matrix. Targets are 0/1 for classification.
inline TrainedModel train(const Matrix& X, const Vector& y, Family family, const Hyperparams& h,
                          std::uint64_t seed, Task task = Task::Classification) {
  detail::check_hyperparams(family, h);
  if (X.empty()) throw ConfigError("cannot train on an empty dataset");
  if (X.size() != y.size()) throw ConfigError("feature/target length mismatch");
  if (task == Task::Classification) {
    const bool has0 = std::any_of(y.begin(), y.end(), [](double v) { return v < 0.5; });
    const bool has1 = std::any_of(y.begin(), y.end(), [](double v) { return v >= 0.5; });
    if (!has0 || !has1) throw ConfigError("classification needs both classes present");
  }
  const std::size_t n = X.front().size();
  std::mt19937_64 rng(seed);
  TrainedModel m;
  m.task = task;
  m.trained_as = to_string(family);
  m.input_dim = n;

  switch (family) {
    case Family::LR:
      m.params = detail::train_linear(X, y, LinearLoss::Logistic, h);
      break;
    case Family::SVM:
      if (task != Task::Classification) throw ConfigError("svm supports classification only");
      m.params = detail::train_linear(X, y, LinearLoss::Hinge, h);
      break;
    case Family::CART: {
      std::vector<std::size_t> rows(X.size());
      std::iota(rows.begin(), rows.end(), 0);
      const bool sub = h.max_features > 0;
      m.params = detail::train_tree(X, y, rows, h, task, h.max_features, sub ? &rng : nullptr);
      break;
    }
    case Family::RF: {
      EnsembleModel e;
      const int mf = h.max_features > 0 ? h.max_features
                                        : std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))));
      for (int t = 0; t < h.n_trees; ++t) {
        std::vector<std::size_t> rows(X.size());
        if (h.bootstrap) {
          for (auto& r : rows)
            r = std::min(X.size() - 1, static_cast<std::size_t>(detail::uniform01(rng) * static_cast<double>(X.size())));
        } else {
          std::iota(rows.begin(), rows.end(), 0);
        }
        const bool sub = h.max_features > 0 || h.bootstrap;
        e.trees.push_back(detail::train_tree(X, y, rows, h, task, sub ? mf : h.max_features, sub ? &rng : nullptr));
      }
      e.weights.assign(e.trees.size(), 1.0 / static_cast<double>(e.trees.size()));
      m.params = std::move(e);
      break;
    }
    case Family::MLP:
      m.params = detail::train_mlp(X, y, h, task, rng);
      break;
  }
  if (task == Task::Classification) {
    std::size_t hit = 0;
    for (std::size_t r = 0; r < X.size(); ++r) hit += predict_positive(m, X[r]) == (y[r] >= 0.5);
    m.train_accuracy = static_cast<double>(hit) / static_cast<double>(X.size());
  }
  return m;
}

inline TrainedModel train(const Dataset& data, Family family, const Hyperparams& h, std::uint64_t seed) {
  const Task task = h.task.value_or(data.schema().is_classification() ? Task::Classification : Task::Regression);
  return train(data.encoded(), data.labels(), family, h, seed, task);
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::json tree_to_json(const TreeModel& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& nd : t.nodes) {
    if (nd.leaf())
      nodes.push_back({{"value", nd.value}});
    else
      nodes.push_back({{"column", nd.column}, {"threshold", nd.threshold}, {"left", nd.left}, {"right", nd.right}});
  }
  return {{"nodes", nodes}};
}

inline TreeModel tree_from_json(const nlohmann::json& j) {
  TreeModel t;
  for (const auto& jn : j.at("nodes")) {
    TreeNode nd;
    if (jn.contains("column")) {
      nd.column = jn.at("column").get<int>();
      nd.threshold = jn.at("threshold").get<double>();
      nd.left = jn.at("left").get<int>();
      nd.right = jn.at("right").get<int>();
    } else {
      nd.value = jn.at("value").get<double>();
    }
    t.nodes.push_back(nd);
  }
  return t;
}

}  // namespace detail

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j{{"format", "cfmip-model"},
                   {"version", kModelFormatVersion},
                   {"family", m.kind_name()},
                   {"task", m.task == Task::Classification ? "classification" : "regression"},
                   {"trained_as", m.trained_as},
                   {"input_dim", m.input_dim}};
  if (std::isfinite(m.train_accuracy)) j["train_accuracy"] = m.train_accuracy;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["weights"] = p.weights;
          j["bias"] = p.bias;
          j["loss"] = p.loss == LinearLoss::Logistic ? "logistic" : "hinge";
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          j["tree"] = detail::tree_to_json(p);
        } else if constexpr (std::is_same_v<T, EnsembleModel>) {
          auto arr = nlohmann::json::array();
          for (const auto& t : p.trees) arr.push_back(detail::tree_to_json(t));
          j["trees"] = arr;
          j["weights"] = p.weights;
          j["aggregation"] = "average-score";
        } else {
          auto arr = nlohmann::json::array();
          for (const auto& L : p.layers) arr.push_back({{"weights", L.weights}, {"bias", L.bias}});
          j["layers"] = arr;
        }
      },
      m.params);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "cfmip-model") throw ModelError("not a cfmip model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ModelError("unsupported model format version " + j.at("version").dump());
    TrainedModel m;
    m.task = j.value("task", std::string("classification")) == "regression" ? Task::Regression : Task::Classification;
    m.trained_as = j.value("trained_as", std::string());
    m.input_dim = j.value("input_dim", std::size_t{0});
    if (j.contains("train_accuracy")) m.train_accuracy = j.at("train_accuracy").get<double>();
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "linear") {
      LinearModel lin;
      lin.weights = j.at("weights").get<Vector>();
      lin.bias = j.at("bias").get<double>();
      lin.loss = j.value("loss", std::string("logistic")) == "hinge" ? LinearLoss::Hinge : LinearLoss::Logistic;
      m.params = lin;
    } else if (fam == "tree") {
      m.params = detail::tree_from_json(j.at("tree"));
    } else if (fam == "ensemble") {
      EnsembleModel e;
      for (const auto& jt : j.at("trees")) e.trees.push_back(detail::tree_from_json(jt));
      e.weights = j.at("weights").get<Vector>();
      m.params = std::move(e);
    } else if (fam == "relu_net") {
      ReluNet net;
      for (const auto& jl : j.at("layers")) net.layers.push_back({jl.at("weights").get<Matrix>(), jl.at("bias").get<Vector>()});
      m.params = std::move(net);
    } else {
      throw ModelError("unknown model family '" + fam + "'");
    }
    validate(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace cfmip
