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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. `acceptance 3 7` runs a subset.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cfmip/builder.hpp"
#include "cfmip/demo.hpp"
#include "cfmip/evaluate.hpp"
#include "cfmip/generate.hpp"
#include "cfmip/solver.hpp"
#include "oracles.hpp"

using namespace cfmip;
namespace ct = cfmip::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared fixtures

struct Fixture {
  std::string name;
  FeatureSchema schema;
  Dataset data;
  TrainedModel model;
  std::vector<std::size_t> factuals;  // first 30 rows predicted in the undesired class
};

const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> all = [] {
    std::vector<Fixture> out;
    for (const char* name : {"german-credit", "heart"}) {
      const DemoSpec spec = load_demo(name);
      Fixture f{name, FeatureSchema::load(spec.schema_path.string()), {}, {}, {}};
      f.data = load_csv(spec.data_path.string(), f.schema);
      f.model = train(f.data, spec.family, spec.hyperparams, spec.seed);
      for (std::size_t r = 0; r < f.data.size() && f.factuals.size() < 30; ++r)
        if (!predict_positive(f.model, f.data.encoded_row(r))) f.factuals.push_back(r);
      out.push_back(std::move(f));
    }
    return out;
  }();
  return all;
}

/// Feature-level change count: scaled numeric moves beyond 1e-6 or a level switch.
std::size_t count_changes(const Vector& a, const Vector& b, const FeatureSchema& schema) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const std::size_t o = schema.offset(j);
    bool moved = false;
    for (std::size_t k = 0; k < schema.feature(j).width(); ++k)
      moved = moved || std::abs(a[o + k] - b[o + k]) > kChangeTol;
    n += moved;
  }
  return n;
}

/// Raw encoded columns of the first solution, straight from the solver.
std::optional<Vector> raw_solution(const Record& factual, const Fixture& f, const CeConfig& cfg) {
  const CeProblem P = build(factual, f.model, f.data, cfg);
  const auto r = solve_milp(P.model, detail::solve_options(cfg, 1, PoolMode::ImprovingOnly));
  if (r.pool.empty()) return std::nullopt;
  Vector x;
  for (int v : P.x) x.push_back(r.pool.front().values[static_cast<std::size_t>(v)]);
  return x;
}

/// Largest deviation of a one-hot group sum from 1, and of any indicator from {0, 1}.
std::pair<double, double> one_hot_error(const Vector& x, const FeatureSchema& schema) {
  double sum_err = 0, int_err = 0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    if (!f.categorical()) continue;
    double s = 0;
    for (std::size_t k = 0; k < f.width(); ++k) {
      const double v = x[schema.offset(j) + k];
      s += v;
      int_err = std::max(int_err, std::min(std::abs(v), std::abs(v - 1)));
    }
    sum_err = std::max(sum_err, std::abs(s - 1));
  }
  return {sum_err, int_err};
}

// ---------------------------------------------------------------------------
// 1. Embedding fidelity

/// Node index of the leaf x lands in (x <= threshold goes left).
int walk(const TreeModel& t, const Vector& x) {
  std::size_t i = 0;
  while (t.nodes[i].left >= 0) i = static_cast<std::size_t>(x[static_cast<std::size_t>(t.nodes[i].column)] <= t.nodes[i].threshold ? t.nodes[i].left : t.nodes[i].right);
  return static_cast<int>(i);
}

struct FidelityStats {
  double max_err = 0;
  int solves = 0, failures = 0;
};

void check_fixed_inputs(const TrainedModel& model, const std::vector<Vector>& points, bool trees, FidelityStats& st) {
  for (const auto& x : points) {
    MilpModel m;
    std::vector<int> cols;
    for (std::size_t i = 0; i < x.size(); ++i) cols.push_back(m.add_continuous("x" + std::to_string(i), 0, 1));
    const auto art = embed_model(m, model, cols);
    for (std::size_t i = 0; i < x.size(); ++i) m.fix(cols[i], x[i]);
    const auto r = solve_milp(m);
    ++st.solves;
    if (r.status != SolveStatus::Optimal) {
      ++st.failures;
      continue;
    }
    const auto& v = r.pool.front().values;
    const double err = std::abs(v[static_cast<std::size_t>(art.output_var)] - score(model, x));
    st.max_err = std::max(st.max_err, err);
    if (err > (trees ? 1e-12 : 1e-6)) ++st.failures;
    if (!trees) continue;
    // Exactly one active leaf per tree, and it is the leaf the tree routes x to.
    std::vector<const TreeModel*> ts;
    if (const auto* t = std::get_if<TreeModel>(&model.params)) ts.push_back(t);
    if (const auto* e = std::get_if<EnsembleModel>(&model.params))
      for (const auto& t : e->trees) ts.push_back(&t);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      int active = 0, node = -1;
      for (std::size_t q = 0; q < art.leaf_vars[k].size(); ++q)
        if (v[static_cast<std::size_t>(art.leaf_vars[k][q])] > 0.5) {
          ++active;
          node = art.leaf_nodes[k][q];
        }
      if (active != 1 || node != walk(*ts[k], x)) ++st.failures;
    }
  }
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const Fixture& g = fixtures().front();
  std::vector<Vector> rows;
  for (std::size_t r = 0; r < 200; ++r) rows.push_back(g.data.encoded_row(r));

  Hyperparams hl;
  Hyperparams ht;
  ht.max_depth = 4;
  Hyperparams he;
  he.n_trees = 5;
  he.max_depth = 3;
  const TrainedModel lin = train(g.data, Family::LR, hl, 1);
  const TrainedModel tree = train(g.data, Family::CART, ht, 1);
  const TrainedModel forest = train(g.data, Family::RF, he, 1);

  // 2-4-1 ReLU net fitted to a quadrant pattern.
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix X;
  Vector y;
  for (int i = 0; i < 300; ++i) {
    X.push_back({u(rng), u(rng)});
    y.push_back((X.back()[0] - 0.5) * (X.back()[1] - 0.3) > 0 ? 1.0 : 0.0);
  }
  Hyperparams hr;
  hr.hidden = {4};
  hr.epochs = 200;
  hr.learning_rate = 0.05;
  hr.l2 = 0;
  const TrainedModel relu = train(X, y, Family::MLP, hr, 3);
  const auto& net = std::get<ReluNet>(relu.params);
  const bool shape_ok = net.layers.size() == 2 && net.layers[0].weights.size() == 4 && net.layers[1].weights.size() == 1;
  std::vector<Vector> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({u(rng), u(rng)});

  std::map<std::string, FidelityStats> st;
  check_fixed_inputs(lin, rows, false, st["linear"]);
  check_fixed_inputs(tree, rows, true, st["tree"]);
  check_fixed_inputs(forest, rows, true, st["ensemble"]);
  check_fixed_inputs(relu, pts, false, st["relu"]);
  const double dt = seconds_since(t0);

  bool pass = shape_ok && dt < 60;
  std::string d;
  for (const auto& [k, s] : st) {
    pass = pass && s.failures == 0 && s.solves == 200;
    d += k + " " + std::to_string(s.solves - s.failures) + "/" + std::to_string(s.solves) + " max|err| " +
         fmt(s.max_err, 2) + "; ";
  }
  return {pass, d + "time " + fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// 2. Solver exactness

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2718);
  int milp_ok = 0, lp_ok = 0;
  double worst_milp = 0, worst_lp = 0;
  for (int t = 0; t < 50; ++t) {
    const int nb = 4 + static_cast<int>(rng() % 9);
    const int rows = 1 + static_cast<int>(rng() % 10);
    const MilpModel m = ct::random_small_milp(rng, nb, 0, rows);
    const auto want = ct::enumerate_integer_model(m);
    const auto got = solve_milp(m);
    if (!want.best) {
      milp_ok += got.status == SolveStatus::Infeasible;
      continue;
    }
    if (got.status != SolveStatus::Optimal) continue;
    const double e = std::abs(got.best_objective - *want.best);
    worst_milp = std::max(worst_milp, e);
    milp_ok += e <= 1e-6;
  }
  for (int t = 0; t < 50; ++t) {
    const auto lp = ct::random_lp3(rng);
    const auto want = ct::vertex_enumeration(lp);
    const auto got = solve_lp(lp.to_model());
    if (!want) {
      lp_ok += got.status == LpStatus::Infeasible;
      continue;
    }
    if (got.status != LpStatus::Optimal) continue;
    const double e = std::abs(got.objective - *want);
    worst_lp = std::max(worst_lp, e);
    lp_ok += e <= 1e-8;
  }
  const double dt = seconds_since(t0);
  return {milp_ok == 50 && lp_ok == 50 && dt < 60,
          "MILP " + std::to_string(milp_ok) + "/50 (max err " + fmt(worst_milp, 2) + "), LP " + std::to_string(lp_ok) +
              "/50 (max err " + fmt(worst_lp, 2) + "), time " + fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// 3-5. Validity, coherence and actionability on the default configuration

struct DefaultRun {
  std::vector<CeResult> results;  // one per factual; empty counterfactuals when infeasible
  std::vector<std::string> errors;
};

const std::map<std::string, DefaultRun>& default_runs() {
  static const std::map<std::string, DefaultRun> runs = [] {
    std::map<std::string, DefaultRun> out;
    for (const auto& f : fixtures()) {
      DefaultRun run;
      for (auto r : f.factuals) {
        try {
          run.results.push_back(generate(f.data.row(r), f.model, f.data, CeConfig{}));
        } catch (const std::exception& e) {
          run.results.emplace_back();
          run.errors.push_back("row " + std::to_string(r) + ": " + e.what());
        }
      }
      out[f.name] = std::move(run);
    }
    return out;
  }();
  return runs;
}

Outcome criterion3() {
  bool pass = true;
  std::string d;
  for (const auto& f : fixtures()) {
    const auto& run = default_runs().at(f.name);
    std::vector<MetricsReport> reps;
    for (std::size_t i = 0; i < run.results.size(); ++i) {
      const auto& r = run.results[i];
      if (r.counterfactuals.empty()) continue;
      std::vector<Record> recs;
      for (const auto& c : r.counterfactuals) recs.push_back(c.record);
      reps.push_back(score_set(f.data.row(f.factuals[i]), recs, f.model, f.schema, r.target));
    }
    const bool complete = reps.size() == 30;
    const auto v = reps.empty() ? MetricSummary{} : aggregate(reps).get("validity").value();
    pass = pass && complete && v.mean == 1.0 && v.se == 0.0;
    d += f.name + " validity " + format_fixed(v.mean, 2) + " (" + format_fixed(v.se, 2) + ") over " +
         std::to_string(reps.size()) + "/30; ";
    for (const auto& e : run.errors) d += "[" + e + "] ";
  }
  return {pass, d};
}

Outcome criterion4() {
  bool pass = true;
  std::string d;
  for (const auto& f : fixtures()) {
    // Returned counterfactuals: one level per categorical feature, and the raw
    // solver point is one-hot as well.
    const auto& run = default_runs().at(f.name);
    double worst_sum = 0, worst_int = 0;
    std::size_t checked = 0;
    for (std::size_t i = 0; i < run.results.size(); ++i) {
      for (const auto& ce : run.results[i].counterfactuals) {
        const auto [s, q] = one_hot_error(ce.encoded, f.schema);
        worst_sum = std::max(worst_sum, s);
        worst_int = std::max(worst_int, q);
      }
      if (const auto raw = raw_solution(f.data.row(f.factuals[i]), f, CeConfig{})) {
        const auto [s, q] = one_hot_error(*raw, f.schema);
        worst_sum = std::max(worst_sum, s);
        worst_int = std::max(worst_int, q);
        ++checked;
      }
    }
    // Exact hull, coherence constraints removed.
    CeConfig cfg;
    cfg.coherence = false;
    cfg.actionability = false;
    cfg.manifold = ManifoldMode::Hard;
    cfg.epsilon = 0.0;
    double worst_hull = 0;
    std::size_t hull_checked = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      const auto raw = raw_solution(f.data.row(f.factuals[i]), f, cfg);
      if (!raw) continue;
      ++hull_checked;
      worst_hull = std::max(worst_hull, one_hot_error(*raw, f.schema).first);
    }
    const bool ok = checked == 30 && worst_sum <= 1e-9 && worst_int <= 1e-9 && hull_checked > 0 && worst_hull <= 1e-9;
    pass = pass && ok;
    d += f.name + ": coherent " + std::to_string(checked) + "/30 raw points (max |sum-1| " + fmt(worst_sum, 2) +
         "), exact hull without coherence " + std::to_string(hull_checked) + "/10 solved, max |sum-1| " +
         fmt(worst_hull, 2) + "; ";
  }
  return {pass, d};
}

Outcome criterion5() {
  bool pass = true;
  std::string d;
  for (const auto& f : fixtures()) {
    std::size_t immutable_moves = 0, ces = 0;
    for (const auto& r : default_runs().at(f.name).results)
      for (const auto& ce : r.counterfactuals) {
        ++ces;
        for (std::size_t j = 0; j < f.schema.size(); ++j)
          if (f.schema.feature(j).actionability == Actionability::Immutable && ce.record[j] != r.factual[j])
            ++immutable_moves;
      }
    std::string kd;
    std::size_t over = 0;
    for (int K : {1, 2, 3}) {
      CeConfig cfg;
      cfg.sparsity = SparsityMode::Hard;
      cfg.max_changes = K;
      std::size_t solved = 0, max_seen = 0;
      for (std::size_t i = 0; i < 10; ++i) {
        try {
          const auto r = generate(f.data.row(f.factuals[i]), f.model, f.data, cfg, false);
          for (const auto& ce : r.counterfactuals) {
            const auto n = count_changes(ce.encoded, r.factual_encoded, f.schema);
            max_seen = std::max(max_seen, n);
            over += n > static_cast<std::size_t>(K);
          }
          solved += !r.counterfactuals.empty();
        } catch (const InfeasibleError&) {
        }
      }
      kd += " K=" + std::to_string(K) + ": " + std::to_string(solved) + "/10 solved, max changes " +
            std::to_string(max_seen) + ";";
    }
    pass = pass && immutable_moves == 0 && ces > 0 && over == 0;
    d += f.name + ": immutable changes " + std::to_string(immutable_moves) + " over " + std::to_string(ces) + " CEs;" +
         kd + " ";
  }
  return {pass, d};
}

// ---------------------------------------------------------------------------
// 6. Manifold membership

Outcome criterion6() {
  struct Setting {
    double eps;
    bool linf;
  };
  bool pass = true;
  std::string d;
  for (const auto& f : fixtures()) {
    for (const Setting s : {Setting{0.0, false}, Setting{0.1, false}, Setting{0.05, true}}) {
      CeConfig cfg;
      cfg.manifold = ManifoldMode::Hard;
      cfg.epsilon = s.eps;
      cfg.p_infinity = s.linf;
      std::size_t ces = 0, outside = 0;
      double worst = 0;
      for (std::size_t i = 0; i < 10; ++i) {
        CeResult r;
        try {
          r = generate(f.data.row(f.factuals[i]), f.model, f.data, cfg, false);
        } catch (const InfeasibleError&) {
          continue;
        }
        const auto rows = class_indices(f.data, static_cast<double>(r.target.cls));
        for (const auto& ce : r.counterfactuals) {
          ++ces;
          const auto h = hull_membership(ce.encoded, f.data, rows, s.eps, s.linf ? HullNorm::LInf : HullNorm::L1);
          worst = std::max(worst, h.distance);
          if (!h.inside || h.distance > s.eps + 1e-6) ++outside;
        }
      }
      pass = pass && ces > 0 && outside == 0;
      d += f.name + " eps=" + fmt(s.eps) + (s.linf ? " inf" : " l1") + ": " + std::to_string(ces) + " CEs, " +
           std::to_string(outside) + " outside, max dist " + fmt(worst, 2) + "; ";
    }
  }
  return {pass, d};
}

// ---------------------------------------------------------------------------
// 7. Diverse pools

Outcome criterion7() {
  const Fixture& g = fixtures().front();
  CeConfig cfg;
  cfg.m = 3;
  int full = 0, unflagged = 0;
  for (auto row : g.factuals) {
    CeResult r;
    try {
      r = generate(g.data.row(row), g.model, g.data, cfg, false);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto& ces = r.counterfactuals;
    bool ok = ces.size() == 3;
    for (std::size_t a = 0; a < ces.size() && ok; ++a) {
      ok = count_changes(ces[a].encoded, r.factual_encoded, g.schema) >= 1;
      for (std::size_t b = a + 1; b < ces.size() && ok; ++b)
        ok = count_changes(ces[a].encoded, ces[b].encoded, g.schema) >= 1;
    }
    full += ok;
    if (ces.size() < 3 && !(r.partial && !r.warnings.empty())) ++unflagged;
  }
  return {full >= 25 && unflagged == 0,
          std::to_string(full) + "/30 instances with 3 distinct CEs, " + std::to_string(unflagged) +
              " unflagged shortfalls"};
}

// ---------------------------------------------------------------------------
// 8. Staged demonstration

Outcome criterion8() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string d;
  const auto g = run_demo(load_demo("german-credit"));
  const auto h = run_demo(load_demo("heart"));
  const double dt = seconds_since(t0);

  auto labels_ok = [](const DemoOutcome& o, const std::string& want) {
    std::string got;
    for (const auto& p : o.parts) got += p.label.back();
    return got == want;
  };
  const bool g_parts = labels_ok(g, "ABCDEF"), h_parts = labels_ok(h, "ABCDE");
  pass = g_parts && h_parts && dt < 300;
  d += "German parts " + std::string(g_parts ? "A-F" : "incomplete") + ", Heart parts " + (h_parts ? "A-E" : "incomplete");
  if (g_parts) {
    const auto& A = g.parts[0].metrics;
    const auto& B = g.parts[1].metrics;
    const auto& D = g.parts[3].metrics;
    const auto& E = g.parts[4].metrics;
    double resid = 0;
    std::size_t n = 0;
    for (const auto& ce : g.parts[5].result.counterfactuals)
      for (double r : ce.causal_residuals) {
        resid = std::max(resid, r);
        ++n;
      }
    const bool ab = B.sparsity > A.sparsity;
    const bool de = E.sparsity <= D.sparsity && E.cat_proximity <= D.cat_proximity;
    const bool f = n > 0 && resid <= 1e-4;
    pass = pass && ab && de && f;
    d += "; sparsity A " + format_fixed(A.sparsity, 3) + " -> B " + format_fixed(B.sparsity, 3) + "; D->E sparsity " +
         format_fixed(D.sparsity, 3) + " -> " + format_fixed(E.sparsity, 3) + ", cat_proximity " +
         format_fixed(D.cat_proximity, 3) + " -> " + format_fixed(E.cat_proximity, 3) + "; Part F residual " +
         fmt(resid, 2);
  }
  for (const auto* o : {&g, &h})
    for (const auto& p : o->parts) pass = pass && p.metrics.validity == 1.0;
  return {pass, d + "; time " + fmt(dt) + "s"};
}

// ---------------------------------------------------------------------------
// 9. Metric invariants and aggregation

/// Mean and STDEV.S/SQRT(COUNT) from running sums, the way a spreadsheet computes them.
std::pair<double, double> sheet_mean_se(const std::vector<double>& v) {
  long double s = 0, s2 = 0;
  for (double x : v) {
    s += x;
    s2 += static_cast<long double>(x) * x;
  }
  const long double n = v.size();
  if (v.size() < 2) return {static_cast<double>(s / n), 0.0};
  const long double var = (n * s2 - s * s) / (n * (n - 1));
  return {static_cast<double>(s / n), static_cast<double>(std::sqrt(std::max<long double>(var, 0)) / std::sqrt(n))};
}

Outcome criterion9() {
  const Fixture& g = fixtures().front();
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, g.data.size() - 1);
  std::uniform_int_distribution<int> size(1, 6);
  int broken = 0;
  std::string first;
  for (int t = 0; t < 100; ++t) {
    const Record f = g.data.row(pick(rng));
    std::vector<Record> ces;
    const int m = size(rng);
    for (int i = 0; i < m; ++i) {
      Record r = g.data.row(pick(rng));
      // Mix in the factual's values so sets range from near copies to strangers.
      for (std::size_t j = 0; j < r.size(); ++j)
        if (rng() % 2) r[j] = f[j];
      ces.push_back(std::move(r));
    }
    const auto rep = score_set(f, ces, g.model, g.schema, Target::classify(1));
    if (const auto e = check_ranges(rep)) {
      ++broken;
      if (first.empty()) first = *e;
    }
  }

  const std::vector<std::vector<double>> hand{{1, 1, 1, 1},
                                              {0.85, 0.95, 0.95, 0.55, 0.93},
                                              {-1143.97, -2728.09, -913.53},
                                              {0.1, 0.2, 0.4, 0.8, 1.6, 3.2},
                                              {0.5}};
  double worst = 0;
  for (const auto& v : hand) {
    std::vector<MetricsReport> reps;
    for (double x : v) {
      MetricsReport r;
      r.count = 1;
      r.validity = 1;
      r.sparsity = x;
      r.cat_proximity = x / 2;
      r.cont_proximity = -std::abs(x);
      reps.push_back(r);
    }
    const auto row = aggregate(reps);
    for (const auto& [name, scale] :
         std::vector<std::pair<std::string, std::function<double(double)>>>{
             {"sparsity", [](double x) { return x; }},
             {"cat_proximity", [](double x) { return x / 2; }},
             {"cont_proximity", [](double x) { return -std::abs(x); }}}) {
      std::vector<double> col;
      for (double x : v) col.push_back(scale(x));
      const auto [mean, se] = sheet_mean_se(col);
      const auto got = row.get(name).value();
      worst = std::max({worst, std::abs(got.mean - mean), std::abs(got.se - se)});
    }
  }
  return {broken == 0 && worst <= 1e-12, std::to_string(100 - broken) + "/100 random sets within range" +
                                             (first.empty() ? "" : " (first break: " + first + ")") +
                                             "; max aggregate deviation " + fmt(worst, 2)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("criteria", only, "criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"embedding fidelity", criterion1}, {"solver exactness", criterion2},  {"validity", criterion3},
      {"coherence", criterion4},          {"actionability and sparsity", criterion5},
      {"manifold membership", criterion6}, {"diverse pools", criterion7},    {"staged demo", criterion8},
      {"metrics", criterion9}};
  bool all_pass = true;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = all[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %d (%s): %s  %s [%.1fs]\n", id, all[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
