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

#include "cfmip/demo.hpp"

using namespace cfmip;

TEST(Demo, SpecsLoad) {
  const auto g = load_demo("german-credit");
  EXPECT_EQ(g.parts.size(), 6u);
  EXPECT_EQ(g.causal.size(), 1u);
  const auto h = load_demo("heart");
  EXPECT_EQ(h.parts.size(), 5u);
  EXPECT_THROW(load_demo("nowhere"), IoError);
}

TEST(Demo, HeartRunsAllParts) {
  const auto spec = load_demo("heart");
  const auto d = run_demo(spec);
  ASSERT_EQ(d.parts.size(), 5u);
  const char* labels[] = {"A", "B", "C", "D", "E"};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NE(d.parts[k].label.find(labels[k]), std::string::npos);
    EXPECT_DOUBLE_EQ(d.parts[k].metrics.validity, 1.0);
    EXPECT_FALSE(check_ranges(d.parts[k].metrics).has_value());
  }
  EXPECT_GT(d.parts[1].metrics.sparsity, d.parts[0].metrics.sparsity);
  for (const auto& ce : d.parts[4].result.counterfactuals) {
    ASSERT_TRUE(ce.certificate.has_value());
    EXPECT_LE(ce.certificate->slack_l1, 1e-6);
  }

  const FeatureSchema schema = FeatureSchema::load(spec.schema_path.string());
  const std::string text = format_demo(d, schema);
  EXPECT_NE(text.find("--"), std::string::npos);
  EXPECT_NE(text.find("validity"), std::string::npos);
  const auto j = demo_to_json(d, schema);
  EXPECT_EQ(j["parts"].size(), 5u);
}

TEST(Demo, CeTableMarksUnchangedCells) {
  std::vector<FeatureSpec> f(2);
  f[0].name = "x";
  f[0].upper = 10;
  f[1].name = "colour";
  f[1].kind = FeatureKind::Categorical;
  f[1].levels = {"red", "blue"};
  const FeatureSchema schema(f, "label", {"no", "yes"});
  CeResult r;
  r.factual = {2.0, std::string("red")};
  Counterfactual ce;
  ce.record = {2.0, std::string("blue")};
  ce.changed = {false, true};
  r.counterfactuals.push_back(ce);
  const std::string t = format_ce_table(r, schema);
  EXPECT_NE(t.find("blue"), std::string::npos);
  EXPECT_NE(t.find("--"), std::string::npos);
  EXPECT_NE(t.find("(a)"), std::string::npos);
}
