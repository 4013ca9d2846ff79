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

// Small hand-built datasets and models for builder and generation tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "cfmip/data.hpp"
#include "cfmip/learners.hpp"

namespace cfmip::testing {

/// a, b continuous on [0, 10]; c categorical {x, y, z}; n integer on [0, 4].
inline FeatureSchema tiny_schema() {
  std::vector<FeatureSpec> f(4);
  f[0].name = "a";
  f[0].lower = 0;
  f[0].upper = 10;
  f[1].name = "b";
  f[1].lower = 0;
  f[1].upper = 10;
  f[2].name = "c";
  f[2].kind = FeatureKind::Categorical;
  f[2].levels = {"x", "y", "z"};
  f[3].name = "n";
  f[3].kind = FeatureKind::Integer;
  f[3].lower = 0;
  f[3].upper = 4;
  return FeatureSchema(f, "label", {"no", "yes"});
}

/// Encoded columns: a, b, c=x, c=y, c=z, n.
inline TrainedModel linear_model(Vector w, double bias) {
  TrainedModel m;
  m.input_dim = w.size();
  m.params = LinearModel{std::move(w), bias, LinearLoss::Hinge};
  return m;
}

inline Record tiny_record(double a, double b, const std::string& c, double n) { return {a, b, c, n}; }

/// Rows drawn uniformly and labelled by the sign of `model`.
inline Dataset labelled_dataset(const FeatureSchema& schema, const TrainedModel& model, std::size_t rows,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 10);
  std::uniform_int_distribution<int> lvl(0, 2), cnt(0, 4);
  const char* levels[] = {"x", "y", "z"};
  std::vector<Record> recs;
  Vector labels;
  for (std::size_t i = 0; i < rows; ++i) {
    Record r = tiny_record(std::round(u(rng) * 100) / 100, std::round(u(rng) * 100) / 100, levels[lvl(rng)], cnt(rng));
    labels.push_back(predict_positive(model, encode(r, schema)) ? 1.0 : 0.0);
    recs.push_back(std::move(r));
  }
  return Dataset(schema, std::move(recs), std::move(labels));
}

/// Given rows labelled by the decision of `model`.
inline Dataset label_rows(const FeatureSchema& schema, const TrainedModel& model, std::vector<Record> recs) {
  Vector labels;
  for (const auto& r : recs) labels.push_back(predict_positive(model, encode(r, schema)) ? 1.0 : 0.0);
  return Dataset(schema, std::move(recs), std::move(labels));
}

/// One continuous feature "x" on [0, 10].
inline FeatureSchema line_schema() {
  FeatureSpec f;
  f.name = "x";
  f.lower = 0;
  f.upper = 10;
  return FeatureSchema({f}, "label", {"no", "yes"});
}

}  // namespace cfmip::testing
