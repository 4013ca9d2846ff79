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

#include <cmath>
#include <limits>

#include "cfmip/milp.hpp"
#include "cfmip/simplex.hpp"

using namespace cfmip;

TEST(MilpModel, BinaryDefaults) {
  MilpModel m;
  const int b = m.add_binary("b");
  EXPECT_EQ(m.variable(b).kind, VarKind::Binary);
  EXPECT_EQ(m.variable(b).lower, 0.0);
  EXPECT_EQ(m.variable(b).upper, 1.0);
  EXPECT_THROW(m.add_variable("bad", VarKind::Binary, 0, 2), ModelError);
  EXPECT_THROW(m.add_continuous("free", 0, std::numeric_limits<double>::infinity()), ModelError);
}

TEST(MilpModel, RejectsBadTerms) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 1);
  EXPECT_THROW(m.add_constraint({{x, std::nan("")}}, Sense::LE, 1, "user"), ModelError);
  EXPECT_THROW(m.add_constraint({{x + 5, 1.0}}, Sense::LE, 1, "user"), ModelError);
  EXPECT_EQ(m.num_constraints(), 0u);
}

TEST(MilpModel, DuplicateNamesDistinctIds) {
  MilpModel m;
  const int a = m.add_continuous("x", 0, 1);
  const int b = m.add_continuous("x", 0, 1);
  EXPECT_NE(a, b);
  const int r = m.add_constraint({{a, 1}, {a, 2}, {b, 1}}, Sense::LE, 3, "user");
  EXPECT_EQ(m.constraints()[static_cast<std::size_t>(r)].terms.size(), 2u);
  EXPECT_EQ(m.constraints()[static_cast<std::size_t>(r)].terms[0].coef, 3.0);
}

TEST(MilpModel, TagGroups) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 1);
  m.add_constraint({{x, 1}}, Sense::LE, 1, "embedding:tree");
  m.add_constraint({{x, 1}}, Sense::GE, 0, "validity");
  EXPECT_EQ(m.tag_groups(), (std::set<std::string>{"embedding", "validity"}));
}

TEST(AbsLink, MinimalValue) {
  for (auto [u, ref, want] : std::vector<std::array<double, 3>>{{3, 1, 2}, {1, 1, 0}}) {
    MilpModel m;
    const int uv = m.add_continuous("u", u, u);
    const int a = m.add_continuous("a", 0, 10);
    add_abs_link(m, uv, a, ref);
    m.set_objective({{a, 1}});
    const auto r = solve_lp(m);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.objective, want, 1e-12);
  }
}

TEST(AbsLink, FreeVariableReachesReference) {
  MilpModel m;
  const int u = m.add_continuous("u", 0, 4);
  const int a = m.add_continuous("a", 0, 10);
  add_abs_link(m, u, a, 2.5);
  m.set_objective({{a, 1}});
  const auto r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 0.0, 1e-12);
  EXPECT_NEAR(r.x[static_cast<std::size_t>(u)], 2.5, 1e-12);
}

namespace {

double pwl_at(double t) {
  MilpModel m;
  const int x = m.add_continuous("t", t, t);
  const auto e = add_pwl_penalty(m, x, {{-1, 1}, {-0.5, 0.25}, {0, 0}, {0.5, 0.25}, {1, 1}});
  m.set_objective({{e.value_var, 1}});
  return solve_lp(m).objective;
}

}  // namespace

TEST(PwlPenalty, BreakpointsAndChords) {
  EXPECT_NEAR(pwl_at(0.5), 0.25, 1e-12);
  // Chord between (0,0) and (0.5,0.25) evaluated at 0.25.
  const double chord = 0.0 + (0.25 - 0.0) / 0.5 * 0.25;
  EXPECT_NEAR(pwl_at(0.25), chord, 1e-12);
  EXPECT_GT(pwl_at(0.25), 0.25 * 0.25);
  EXPECT_NEAR(pwl_at(-1.0), 1.0, 1e-12);
}

TEST(PwlPenalty, RejectsConcave) {
  MilpModel m;
  const int x = m.add_continuous("t", -1, 1);
  EXPECT_THROW(add_pwl_penalty(m, x, {{-1, 0}, {0, 1}, {1, 0}}), ModelError);
  EXPECT_THROW(add_pwl_penalty(m, x, {{0, 0}, {0, 1}}), ModelError);
}

TEST(ExportLp, Sections) {
  MilpModel m;
  const int x = m.add_continuous("x", 0, 5);
  const int b = m.add_binary("b");
  const int k = m.add_integer("k", 0, 3);
  m.add_constraint({{x, 1}}, Sense::GE, 1, "user");
  m.add_constraint({{x, 1}, {b, 2}, {k, -1}}, Sense::LE, 4, "validity");
  m.set_objective({{x, 1}});
  const std::string lp = export_lp(m);
  for (const char* s : {"Minimize", "Subject To", "Bounds", "Binaries", "Generals", "End", "x >= 1", "\\ tag: validity"})
    EXPECT_NE(lp.find(s), std::string::npos) << s;
  const auto bins = lp.find("Binaries");
  EXPECT_NE(lp.find(" b", bins), std::string::npos);
  EXPECT_EQ(lp, export_lp(m));
}
