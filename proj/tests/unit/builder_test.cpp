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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "cfmip/builder.hpp"
#include "cfmip/evaluate.hpp"
#include "cfmip/generate.hpp"
#include "cfmip/solver.hpp"
#include "tiny.hpp"

using namespace cfmip;
using namespace cfmip::testing;

namespace {

CeConfig l1_config() {
  CeConfig c;
  c.distance = DistanceKind::L1;
  return c;
}

/// Two continuous features p and q on [0, 10].
FeatureSchema plane_schema(const std::vector<std::string>& names = {"p", "q"}) {
  std::vector<FeatureSpec> f(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    f[i].name = names[i];
    f[i].lower = 0;
    f[i].upper = 10;
  }
  return FeatureSchema(f, "label", {"no", "yes"});
}

double solved_objective(const CeProblem& P) {
  const auto r = solve_milp(P.model);
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  return r.best_objective;
}

/// Cheapest single-feature change that lifts a linear score to `margin`:
/// scaled L1 for numerics, one unit per categorical switch.
std::optional<double> single_change_oracle(const Vector& w, double bias, const Vector& xhat, double margin) {
  const double s0 = bias + std::inner_product(w.begin(), w.end(), xhat.begin(), 0.0);
  const double need = margin - s0;
  std::optional<double> best;
  auto take = [&](double c) { best = best ? std::min(*best, c) : c; };
  for (int j : {0, 1}) {
    if (w[j] == 0) continue;
    const double d = need / w[j];
    if (xhat[j] + d >= -1e-12 && xhat[j] + d <= 1 + 1e-12) take(std::abs(d));
  }
  for (int k = 2; k <= 4; ++k)
    if (xhat[k] < 0.5)
      for (int h = 2; h <= 4; ++h)
        if (xhat[h] > 0.5 && w[k] - w[h] >= need - 1e-12) take(1.0);
  for (int n = 0; n <= 4; ++n) {
    const double d = n / 4.0 - xhat[5];
    if (w[5] * d >= need - 1e-12) take(std::abs(d));
  }
  return best;
}

}  // namespace

TEST(Builder, GroupCensusForMinimalConfig) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1, 1, 0, 0, 0, 1}, -2);
  const auto data = labelled_dataset(schema, model, 40, 3);
  auto cfg = l1_config();
  cfg.actionability = false;
  const auto P = build(tiny_record(1, 1, "x", 0), model, data, cfg);
  EXPECT_EQ(P.model.tag_groups(), (std::set<std::string>{"embedding", "validity", "proximity", "coherence", "domain"}));
}

TEST(Builder, GroupCensusForFullConfig) {
  auto schema = tiny_schema();
  const auto model = linear_model({1, 1, 0, 0, 0, 1}, -1.2);
  const auto data = labelled_dataset(schema, model, 60, 4);
  CeConfig cfg;
  cfg.sparsity = SparsityMode::Hard;
  cfg.max_changes = 3;
  cfg.manifold = ManifoldMode::Hard;
  cfg.epsilon = 0.2;
  cfg.actionability_overrides["n"] = Actionability::NonDecreasing;
  CausalRelation rel;
  rel.endogenous = "b";
  rel.parents = {"a"};
  rel.coefficients = {0.5};
  cfg.causality.push_back(rel);
  cfg.extra_constraints.push_back({{{"a", 1.0}}, Sense::LE, 9.0});
  const auto P = build(tiny_record(1, 1, "x", 0), model, data, cfg);
  for (const char* g : {"validity", "proximity", "coherence", "sparsity", "manifold", "actionability", "causality",
                        "user", "domain"})
    EXPECT_TRUE(P.model.tag_groups().count(g)) << g;
}

TEST(Builder, ImmutableAndMonotoneBounds) {
  auto schema = tiny_schema();
  const auto model = linear_model({1, 1, 0, 0, 0, 1}, -2);
  const auto data = labelled_dataset(schema, model, 20, 5);
  CeConfig cfg;
  cfg.actionability_overrides["b"] = Actionability::Immutable;
  cfg.actionability_overrides["a"] = Actionability::NonDecreasing;
  cfg.actionability_overrides["n"] = Actionability::NonIncreasing;
  const auto P = build(tiny_record(5, 3, "y", 2), model, data, cfg);
  const auto& a = P.model.variable(P.x[0]);
  const auto& b = P.model.variable(P.x[1]);
  EXPECT_DOUBLE_EQ(a.lower, 0.5);
  EXPECT_DOUBLE_EQ(a.upper, 1.0);
  EXPECT_DOUBLE_EQ(b.lower, 0.3);
  EXPECT_DOUBLE_EQ(b.upper, 0.3);
  EXPECT_DOUBLE_EQ(P.model.variable(P.integer_vars[3]).upper, 2.0);
}

TEST(Builder, ConditionalTransitionsFixDisallowedLevels) {
  auto schema = tiny_schema();
  const auto model = linear_model({0, 0, 0, 0, 3, 0}, -1);
  const auto data = labelled_dataset(schema, model, 20, 6);
  CeConfig cfg;
  cfg.actionability_overrides["c"] = Actionability::Conditional;
  cfg.transition_overrides["c"] = {{"x", {"y"}}};
  const auto P = build(tiny_record(5, 5, "x", 2), model, data, cfg);
  EXPECT_EQ(P.model.variable(P.x[4]).upper, 0.0);  // c=z
  EXPECT_EQ(P.model.variable(P.x[3]).upper, 1.0);  // c=y
  // Only z lifts the score, so the model is infeasible.
  EXPECT_EQ(solve_milp(P.model).status, SolveStatus::Infeasible);
  cfg.transition_overrides["c"] = {{"x", {"y", "z"}}};
  EXPECT_EQ(solve_milp(build(tiny_record(5, 5, "x", 2), model, data, cfg).model).status, SolveStatus::Optimal);
}

TEST(Builder, ConditionalOnNumericFeatureIsRejected) {
  auto schema = tiny_schema();
  const auto model = linear_model({1, 1, 0, 0, 0, 1}, -2);
  const auto data = labelled_dataset(schema, model, 10, 7);
  CeConfig cfg;
  cfg.actionability_overrides["a"] = Actionability::Conditional;
  EXPECT_THROW(build(tiny_record(1, 1, "x", 0), model, data, cfg), ConfigError);
}

TEST(Builder, NoCategoricalsMeansNoCoherenceRows) {
  const auto schema = plane_schema();
  const auto model = linear_model({1, 1}, -1);
  const auto data = label_rows(schema, model, {{1.0, 1.0}, {9.0, 9.0}});
  const auto P = build({1.0, 1.0}, model, data, CeConfig{});
  EXPECT_EQ(P.model.tag_groups().count("coherence"), 0u);
}

TEST(Builder, OneDimensionalL1Optimum) {
  // score = 10 s - 4 with s the scaled feature; the cheapest valid point sits at
  // s = (4 + margin) / 10.
  const auto schema = line_schema();
  const auto model = linear_model({10}, -4);
  const auto data = label_rows(schema, model, {{0.0}, {5.0}, {10.0}});
  auto cfg = l1_config();
  const double expected = 0.4 + kDefaultMargin / 10;
  const auto r = generate({0.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 1u);
  EXPECT_NEAR(r.counterfactuals[0].objective, expected, 1e-9);
  EXPECT_NEAR(as_number(r.counterfactuals[0].record[0]), 10 * expected, 1e-8);

  cfg.feature_weights["x"] = 2.0;
  const auto r2 = generate({0.0}, model, data, cfg);
  EXPECT_NEAR(r2.counterfactuals[0].objective, 2 * expected, 1e-9);
  EXPECT_NEAR(as_number(r2.counterfactuals[0].record[0]), 10 * expected, 1e-8);
}

TEST(Builder, HardSingleChangeMatchesOracle) {
  const auto schema = tiny_schema();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uw(-3, 3), ugap(0.1, 1.5);
  int feasible = 0;
  for (int trial = 0; trial < 25; ++trial) {
    Vector w(6);
    for (auto& v : w) v = uw(rng);
    const Record f = tiny_record(2, 3, "x", 1);
    const Vector xhat = encode(f, schema);
    const double bias = -std::inner_product(w.begin(), w.end(), xhat.begin(), 0.0) - ugap(rng);
    const auto model = linear_model(w, bias);
    const auto data = labelled_dataset(schema, model, 20, static_cast<std::uint64_t>(trial));
    auto cfg = l1_config();
    cfg.sparsity = SparsityMode::Hard;
    cfg.max_changes = 1;
    const auto oracle = single_change_oracle(w, bias, xhat, kDefaultMargin);
    if (!oracle) {
      EXPECT_THROW(generate(f, model, data, cfg, false), InfeasibleError) << "trial " << trial;
      continue;
    }
    ++feasible;
    const auto r = generate(f, model, data, cfg);
    ASSERT_EQ(r.counterfactuals.size(), 1u);
    const auto& ce = r.counterfactuals[0];
    EXPECT_NEAR(ce.objective, *oracle, 1e-6) << "trial " << trial;
    EXPECT_LE(std::count(ce.changed.begin(), ce.changed.end(), true), 1) << "trial " << trial;
    EXPECT_TRUE(ce.valid);
  }
  EXPECT_GT(feasible, 10);
}

TEST(Builder, ConstraintBlocksNeverLowerTheOptimum) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 80, 9);
  const Record f = tiny_record(4, 2, "x", 1);
  auto cfg = l1_config();
  cfg.actionability = false;
  std::vector<double> obj;
  obj.push_back(solved_objective(build(f, model, data, cfg)));
  cfg.actionability = true;
  cfg.actionability_overrides["a"] = Actionability::NonIncreasing;
  obj.push_back(solved_objective(build(f, model, data, cfg)));
  cfg.sparsity = SparsityMode::Hard;
  cfg.max_changes = 2;
  obj.push_back(solved_objective(build(f, model, data, cfg)));
  cfg.manifold = ManifoldMode::Hard;
  cfg.epsilon = 0.3;
  cfg.sparsity = SparsityMode::Off;
  const double with_manifold = solved_objective(build(f, model, data, cfg));
  for (std::size_t i = 1; i < obj.size(); ++i) EXPECT_GE(obj[i], obj[i - 1] - 1e-9);
  EXPECT_GE(with_manifold, obj[1] - 1e-9);
}

TEST(Manifold, ExactHullOfOnePointReturnsThatPoint) {
  const auto schema = plane_schema();
  const auto model = linear_model({1, 1}, -1);
  const auto data = label_rows(schema, model, {{1.0, 1.0}, {2.0, 1.0}, {8.0, 9.0}});
  CeConfig cfg;
  cfg.manifold = ManifoldMode::Hard;
  const auto r = generate({1.0, 1.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 1u);
  EXPECT_NEAR(as_number(r.counterfactuals[0].record[0]), 8.0, 1e-6);
  EXPECT_NEAR(as_number(r.counterfactuals[0].record[1]), 9.0, 1e-6);
}

TEST(Manifold, SegmentHullAndForcedConflict) {
  const auto schema = plane_schema();
  const auto model = linear_model({1, 1}, -1);
  const auto data = label_rows(schema, model, {{2.0, 10.0}, {10.0, 2.0}, {1.0, 1.0}});
  auto cfg = l1_config();
  cfg.manifold = ManifoldMode::Hard;
  const auto r = generate({0.0, 0.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 1u);
  const auto h = hull_membership(r.counterfactuals[0].encoded, data, {0, 1}, 0.0, HullNorm::L1);
  EXPECT_LE(h.distance, 1e-6);
  EXPECT_NEAR(r.counterfactuals[0].objective, 1.2, 1e-6);

  // q <= 1 leaves the segment (q >= 2 on it) while the model alone still has room.
  cfg.extra_constraints.push_back({{{"q", 1.0}}, Sense::LE, 1.0});
  try {
    generate({0.0, 0.0}, model, data, cfg);
    FAIL() << "expected an infeasible report";
  } catch (const InfeasibleError& e) {
    auto tags = e.tags();
    std::sort(tags.begin(), tags.end());
    EXPECT_EQ(tags, (std::vector<std::string>{"manifold", "user"}));
  }
}

TEST(Manifold, ExactHullKeepsOneHotGroupsWithoutCoherence) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1, 1, 0.4, -0.2, 0.9, 0.5}, -1.6);
  const auto data = labelled_dataset(schema, model, 80, 12);
  CeConfig cfg;
  cfg.coherence = false;
  cfg.manifold = ManifoldMode::Hard;
  cfg.m = 3;
  for (const auto& f : {tiny_record(1, 2, "y", 0), tiny_record(0.5, 0.5, "x", 1), tiny_record(3, 1, "y", 0)}) {
    const auto r = generate(f, model, data, cfg);
    ASSERT_FALSE(r.counterfactuals.empty());
    for (const auto& ce : r.counterfactuals) {
      EXPECT_NEAR(ce.encoded[2] + ce.encoded[3] + ce.encoded[4], 1.0, 1e-9);
      ASSERT_TRUE(ce.certificate.has_value());
      EXPECT_LE(ce.certificate->slack_l1, 1e-6);
    }
  }
}

TEST(Manifold, InfinityBallCertificateAgreesWithHullCheck) {
  const auto schema = plane_schema();
  const auto model = linear_model({1, 1}, -1);
  const auto data = label_rows(schema, model, {{1.0, 1.0}, {8.0, 9.0}, {6.0, 7.0}});
  CeConfig cfg;
  cfg.manifold = ManifoldMode::Hard;
  cfg.epsilon = 0.05;
  cfg.p_infinity = true;
  const auto r = generate({1.0, 1.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 1u);
  const auto& ce = r.counterfactuals[0];
  ASSERT_TRUE(ce.certificate.has_value());
  EXPECT_LE(ce.certificate->slack_linf, 0.05 + 1e-6);
  const auto h = hull_membership(ce.encoded, data, {1, 2}, 0.05, HullNorm::LInf);
  EXPECT_TRUE(h.inside);
  EXPECT_LE(h.distance, ce.certificate->slack_linf + 1e-9);
}

TEST(Causality, ExplicitMechanismPropagatesParentChange) {
  const auto schema = plane_schema({"p", "x", "q"});
  const auto model = linear_model({10, 0, 0}, -2);
  const auto data = label_rows(schema, model, {{1.0, 1.0, 5.0}, {5.0, 2.0, 5.0}});
  auto cfg = l1_config();
  CausalRelation rel;
  rel.endogenous = "x";
  rel.parents = {"p"};
  rel.coefficients = {2.0};
  cfg.causality.push_back(rel);
  cfg.extra_constraints.push_back({{{"p", 1.0}}, Sense::GE, 3.0});
  const auto r = generate({1.0, 1.0, 5.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 1u);
  const auto& ce = r.counterfactuals[0];
  EXPECT_NEAR(as_number(ce.record[0]), 3.0, 1e-6);
  EXPECT_NEAR(as_number(ce.record[1]), 5.0, 1e-6);
  EXPECT_NEAR(ce.objective, 0.2 + 0.4, 1e-6);
  ASSERT_EQ(ce.causal_residuals.size(), 1u);
  EXPECT_LE(ce.causal_residuals[0], 1e-6);
}

TEST(Causality, UnchangedParentsLeaveChildAlone) {
  const auto schema = plane_schema({"p", "x", "q"});
  const auto model = linear_model({0, 0, 10}, -8);
  const auto data = label_rows(schema, model, {{1.0, 1.0, 5.0}, {5.0, 2.0, 9.0}});
  auto cfg = l1_config();
  CausalRelation rel;
  rel.endogenous = "x";
  rel.parents = {"p"};
  rel.coefficients = {2.0};
  cfg.causality.push_back(rel);
  const auto r = generate({1.0, 1.0, 5.0}, model, data, cfg);
  const auto& ce = r.counterfactuals.at(0);
  EXPECT_NEAR(as_number(ce.record[0]), 1.0, 1e-9);
  EXPECT_NEAR(as_number(ce.record[1]), 1.0, 1e-9);
  EXPECT_GT(as_number(ce.record[2]), 8.0);
}

TEST(Causality, CycleIsRejected) {
  const auto schema = plane_schema({"p", "x", "q"});
  const auto model = linear_model({10, 0, 0}, -2);
  const auto data = label_rows(schema, model, {{1.0, 1.0, 5.0}, {5.0, 2.0, 5.0}});
  CeConfig cfg;
  CausalRelation a, b;
  a.endogenous = "x";
  a.parents = {"p"};
  a.coefficients = {1.0};
  b.endogenous = "p";
  b.parents = {"x"};
  b.coefficients = {1.0};
  cfg.causality = {a, b};
  EXPECT_THROW(build({1.0, 1.0, 5.0}, model, data, cfg), ConfigError);
}

TEST(Causality, LearnedMechanismResidualIsSmall) {
  const auto schema = plane_schema({"p", "x", "q"});
  const auto model = linear_model({10, 0, 0}, -2);
  const auto data = label_rows(schema, model, {{1.0, 1.0, 5.0}, {5.0, 2.0, 5.0}});
  auto mech = std::make_shared<TrainedModel>(linear_model({0.5}, 0.1));
  mech->task = Task::Regression;
  auto cfg = l1_config();
  CausalRelation rel;
  rel.endogenous = "x";
  rel.parents = {"p"};
  rel.mechanism = CausalRelation::Mechanism::Learned;
  rel.model = mech;
  cfg.causality.push_back(rel);
  cfg.extra_constraints.push_back({{{"p", 1.0}}, Sense::GE, 3.0});
  const auto r = generate({1.0, 1.0, 5.0}, model, data, cfg);
  const auto& ce = r.counterfactuals.at(0);
  // x_s = 0.1 + 0.5 (0.3 - 0.1)
  EXPECT_NEAR(as_number(ce.record[1]), 2.0, 1e-6);
  EXPECT_LE(ce.causal_residuals.at(0), 1e-4);
}

TEST(Generate, SingleCounterfactualIsValid) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 60, 13);
  for (const auto& f : {tiny_record(1, 1, "x", 0), tiny_record(9, 9, "z", 4)}) {
    const auto r = generate(f, model, data, CeConfig{});
    ASSERT_EQ(r.counterfactuals.size(), 1u);
    EXPECT_TRUE(r.counterfactuals[0].valid);
    EXPECT_NE(predict_positive(model, r.factual_encoded), predict_positive(model, r.counterfactuals[0].encoded));
  }
}

TEST(Generate, PoolReturnsDistinctCounterfactuals) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 60, 14);
  CeConfig cfg;
  cfg.m = 3;
  const auto r = generate(tiny_record(1, 1, "x", 0), model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 3u);
  EXPECT_FALSE(r.partial);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_TRUE(r.counterfactuals[a].valid);
    for (std::size_t b = a + 1; b < 3; ++b)
      EXPECT_NE(r.counterfactuals[a].record, r.counterfactuals[b].record);
  }
  for (std::size_t a = 1; a < 3; ++a)
    EXPECT_GE(r.counterfactuals[a].objective, r.counterfactuals[a - 1].objective - 1e-9);
}

TEST(Generate, AllImmutableReportsActionabilityAndValidity) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 30, 15);
  CeConfig cfg;
  for (const auto& f : schema.features()) cfg.actionability_overrides[f.name] = Actionability::Immutable;
  try {
    generate(tiny_record(1, 1, "x", 0), model, data, cfg);
    FAIL() << "expected an infeasible report";
  } catch (const InfeasibleError& e) {
    auto tags = e.tags();
    std::sort(tags.begin(), tags.end());
    EXPECT_EQ(tags, (std::vector<std::string>{"actionability", "validity"}));
  }
}

TEST(Generate, FeatureExclusionGivesDistinctChangePatterns) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 60, 16);
  CeConfig cfg;
  cfg.diversity = DiversityMode::Iterative;
  cfg.strategy = IterativeStrategy::FeatureExclusion;
  cfg.m = 3;
  const auto r = generate(tiny_record(1, 1, "x", 0), model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 3u);
  std::vector<std::vector<bool>> patterns;
  for (const auto& ce : r.counterfactuals) {
    std::vector<bool> moved;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto o = schema.offset(j);
      bool m = false;
      for (std::size_t k = 0; k < schema.feature(j).width(); ++k)
        m = m || std::abs(ce.encoded[o + k] - r.factual_encoded[o + k]) >= kTightChange - 1e-9;
      moved.push_back(m);
    }
    patterns.push_back(moved);
  }
  EXPECT_NE(patterns[0], patterns[1]);
  EXPECT_NE(patterns[0], patterns[2]);
  EXPECT_NE(patterns[1], patterns[2]);
}

TEST(Generate, DistanceStrategySeparatesByTau) {
  const auto schema = tiny_schema();
  const auto model = linear_model({1.5, 1.0, -0.5, 0.8, 0.3, 1.2}, -2.2);
  const auto data = labelled_dataset(schema, model, 60, 17);
  CeConfig cfg;
  cfg.diversity = DiversityMode::Iterative;
  cfg.strategy = IterativeStrategy::Distance;
  cfg.tau = 0.1;
  cfg.m = 3;
  const auto r = generate(tiny_record(1, 1, "x", 0), model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 3u);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < a; ++b) {
      double gap = 0;
      for (std::size_t c = 0; c < schema.width(); ++c)
        gap = std::max(gap, std::abs(r.counterfactuals[a].encoded[c] - r.counterfactuals[b].encoded[c]));
      EXPECT_GE(gap, 0.1 - 1e-6);
    }
}

TEST(Generate, PerClusterUsesEachCluster) {
  const auto schema = plane_schema();
  const auto model = linear_model({1, 1}, -1);
  const auto data = label_rows(schema, model,
                               {{1.0, 1.0}, {9.0, 9.0}, {9.5, 8.5}, {2.0, 9.5}, {2.5, 9.0}, {9.0, 2.0}, {9.5, 2.5}});
  CeConfig cfg;
  cfg.manifold = ManifoldMode::Clustered;
  cfg.clusters = 3;
  cfg.diversity = DiversityMode::Iterative;
  cfg.strategy = IterativeStrategy::PerCluster;
  cfg.m = 3;
  const auto r = generate({1.0, 1.0}, model, data, cfg);
  ASSERT_EQ(r.counterfactuals.size(), 3u);
  std::set<int> clusters;
  for (const auto& ce : r.counterfactuals) clusters.insert(ce.certificate.value().cluster);
  EXPECT_EQ(clusters.size(), 3u);
}

TEST(Generate, RegressionTargetBand) {
  const auto schema = plane_schema();
  auto model = linear_model({4, 6}, 0);
  model.task = Task::Regression;
  Dataset data(schema, {{1.0, 1.0}, {5.0, 5.0}}, {1.0, 5.0});
  CeConfig cfg;
  cfg.regression_target = Target::at_least(5.0, 1e-3);
  const auto r = generate({1.0, 1.0}, model, data, cfg);
  const auto& ce = r.counterfactuals.at(0);
  EXPECT_GE(score(model, ce.encoded), 5.0 + 1e-3 - 1e-7);
  EXPECT_TRUE(ce.valid);
  cfg.regression_target.reset();
  EXPECT_THROW(generate({1.0, 1.0}, model, data, cfg), ConfigError);
}
