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

// Evaluation metrics for counterfactual sets and an independent convex-hull
// membership check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfmip/data.hpp"
#include "cfmip/embed.hpp"
#include "cfmip/learners.hpp"
#include "cfmip/milp.hpp"
#include "cfmip/simplex.hpp"

namespace cfmip {

struct MetricsReport {
  double validity = 0.0;
  double sparsity = 0.0;
  double cat_proximity = 0.0;
  double cont_proximity = 0.0;
  std::optional<double> cat_diversity;
  std::optional<double> cont_diversity;
  std::optional<double> count_diversity;
  std::size_t count = 0;
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"validity",      "sparsity",       "cat_proximity", "cont_proximity",
                                              "cat_diversity", "cont_diversity", "count_diversity"};
  return names;
}

inline std::optional<double> metric_value(const MetricsReport& r, const std::string& name) {
  if (name == "validity") return r.validity;
  if (name == "sparsity") return r.sparsity;
  if (name == "cat_proximity") return r.cat_proximity;
  if (name == "cont_proximity") return r.cont_proximity;
  if (name == "cat_diversity") return r.cat_diversity;
  if (name == "cont_diversity") return r.cont_diversity;
  if (name == "count_diversity") return r.count_diversity;
  throw ConfigError("unknown metric '" + name + "'");
}

namespace detail {

inline bool level_changed(const Record& a, const Record& b, std::size_t j) { return as_level(a[j]) != as_level(b[j]); }

/// A numeric feature counts as changed beyond the scaled threshold used by the builder.
inline bool numeric_changed(const Record& a, const Record& b, std::size_t j, const FeatureSpec& f) {
  return std::abs(scale_value(as_number(a[j]), f) - scale_value(as_number(b[j]), f)) > kChangeTol;
}

inline bool feature_changed(const Record& a, const Record& b, std::size_t j, const FeatureSpec& f) {
  return f.categorical() ? level_changed(a, b, j) : numeric_changed(a, b, j, f);
}

}  // namespace detail

/// Scores one counterfactual set against its factual. Numeric distances are in
/// original units; a feature is "changed" beyond 1e-6 in scaled units or on a level switch.
inline MetricsReport score_set(const Record& factual, const std::vector<Record>& ces, const TrainedModel& model,
                               const FeatureSchema& schema, const Target& target) {
  if (ces.empty()) throw ConfigError("score_set needs at least one counterfactual");
  std::size_t n_cat = 0, n_num = 0;
  for (const auto& f : schema.features()) (f.categorical() ? n_cat : n_num) += 1;
  const double nf = static_cast<double>(schema.size());
  const double m = static_cast<double>(ces.size());

  MetricsReport r;
  r.count = ces.size();
  double valid = 0, sparse = 0, catp = 0, contp = 0;
  for (const auto& ce : ces) {
    valid += satisfies(model, encode(ce, schema), target) ? 1.0 : 0.0;
    std::size_t changed = 0, cat_changed = 0;
    double l1 = 0.0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema.feature(j);
      if (detail::feature_changed(factual, ce, j, f)) {
        ++changed;
        if (f.categorical()) ++cat_changed;
      }
      if (!f.categorical()) l1 += std::abs(as_number(ce[j]) - as_number(factual[j]));
    }
    sparse += static_cast<double>(changed) / nf;
    if (n_cat) catp += static_cast<double>(cat_changed) / static_cast<double>(n_cat);
    contp += l1;
  }
  r.validity = valid / m;
  r.sparsity = 1.0 - sparse / m;
  r.cat_proximity = 1.0 - catp / m;
  r.cont_proximity = contp == 0.0 ? 0.0 : -contp / m;

  if (ces.size() > 1) {
    double catd = 0, contd = 0, countd = 0, pairs = 0;
    for (std::size_t a = 0; a < ces.size(); ++a)
      for (std::size_t b = a + 1; b < ces.size(); ++b) {
        std::size_t diff = 0, cat_diff = 0;
        double l1 = 0.0;
        for (std::size_t j = 0; j < schema.size(); ++j) {
          const auto& f = schema.feature(j);
          if (detail::feature_changed(ces[a], ces[b], j, f)) {
            ++diff;
            if (f.categorical()) ++cat_diff;
          }
          if (!f.categorical()) l1 += std::abs(as_number(ces[a][j]) - as_number(ces[b][j]));
        }
        pairs += 1;
        if (n_cat) catd += static_cast<double>(cat_diff) / static_cast<double>(n_cat);
        contd += l1;
        countd += static_cast<double>(diff) / nf;
      }
    r.cat_diversity = catd / pairs;
    r.cont_diversity = contd / pairs;
    r.count_diversity = countd / pairs;
  }
  return r;
}

/// Range invariants of a report; returns the first broken one, if any.
inline std::optional<std::string> check_ranges(const MetricsReport& r) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(r.validity)) return "validity outside [0,1]";
  if (!unit(r.sparsity)) return "sparsity outside [0,1]";
  if (!unit(r.cat_proximity)) return "cat_proximity outside [0,1]";
  if (!(r.cont_proximity <= 0.0)) return "cont_proximity positive";
  const bool has_div = r.cat_diversity || r.cont_diversity || r.count_diversity;
  if (r.count <= 1 && has_div) return "diversity present for a single counterfactual";
  if (r.count > 1 && !(r.cat_diversity && r.cont_diversity && r.count_diversity)) return "diversity missing";
  if (r.cat_diversity && !unit(*r.cat_diversity)) return "cat_diversity outside [0,1]";
  if (r.cont_diversity && !(*r.cont_diversity >= 0.0)) return "cont_diversity negative";
  if (r.count_diversity && !unit(*r.count_diversity)) return "count_diversity outside [0,1]";
  return std::nullopt;
}

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error (sample standard deviation over sqrt(n)) per metric.
/// Metrics absent from every report are left out.
struct AggregateRow {
  std::string label;
  std::vector<std::pair<std::string, MetricSummary>> metrics;
  std::optional<MetricSummary> get(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    return std::nullopt;
  }
};

inline MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  }
  return s;
}

inline AggregateRow aggregate(const std::vector<MetricsReport>& reports, std::string label = "") {
  if (reports.empty()) throw ConfigError("aggregate needs at least one report");
  AggregateRow row;
  row.label = std::move(label);
  for (const auto& name : metric_names()) {
    std::vector<double> vals;
    for (const auto& r : reports)
      if (auto v = metric_value(r, name)) vals.push_back(*v);
    if (!vals.empty()) row.metrics.emplace_back(name, summarize(vals));
  }
  return row;
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v == 0.0 ? 0.0 : v);
  return buf;
}

/// Aligned text table, one row per aggregate, cells shaped "mean (s.e.)".
inline std::string format_table(const std::vector<AggregateRow>& rows) {
  std::vector<std::string> header{""};
  for (const auto& n : metric_names()) header.push_back(n);
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows) {
    std::vector<std::string> line{r.label};
    for (const auto& n : metric_names()) {
      const auto s = r.get(n);
      if (!s) {
        line.push_back("--");
        continue;
      }
      line.push_back(s->n > 1 ? format_fixed(s->mean, 2) + " (" + format_fixed(s->se, 2) + ")" : format_fixed(s->mean, 2));
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& l : cells)
    for (std::size_t c = 0; c < l.size(); ++c) width[c] = std::max(width[c], l[c].size());
  std::ostringstream os;
  for (const auto& l : cells) {
    for (std::size_t c = 0; c < l.size(); ++c) {
      if (c) os << "  ";
      os << std::string(width[c] - l[c].size(), ' ') << l[c];
    }
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j{{"validity", r.validity},
                   {"sparsity", r.sparsity},
                   {"cat_proximity", r.cat_proximity},
                   {"cont_proximity", r.cont_proximity},
                   {"count", r.count}};
  if (r.cat_diversity) j["cat_diversity"] = *r.cat_diversity;
  if (r.cont_diversity) j["cont_diversity"] = *r.cont_diversity;
  if (r.count_diversity) j["count_diversity"] = *r.count_diversity;
  return j;
}

inline nlohmann::json aggregate_to_json(const AggregateRow& row) {
  nlohmann::json j{{"label", row.label}};
  for (const auto& [k, s] : row.metrics) j[k] = {{"mean", s.mean}, {"se", s.se}, {"n", s.n}};
  return j;
}

// ---------------------------------------------------------------------------
// Hull membership

enum class HullNorm { L1, LInf };

struct HullCertificate {
  bool inside = false;
  double distance = 0.0;   // min ||s||_p over the hull
  double violation = 0.0;  // max(0, distance - epsilon)
  std::vector<std::pair<std::size_t, double>> lambda;
};

/// Solves min ||Σλx̄ - x||_p over λ in the simplex spanned by `rows` of `data`
/// (encoded space). The point is in the ε-hull when the minimum is ≤ ε + 1e-6.
inline HullCertificate hull_membership(const Vector& point, const Dataset& data, const std::vector<std::size_t>& rows,
                                       double epsilon, HullNorm p) {
  if (rows.empty()) throw SchemaError("hull is undefined for an empty row set");
  if (point.size() != data.width()) throw SchemaError("point width does not match the dataset");
  MilpModel m;
  std::vector<int> lam;
  std::vector<Term> sum;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lam.push_back(m.add_continuous("l" + std::to_string(r), 0.0, 1.0));
    sum.push_back({lam.back(), 1.0});
  }
  m.add_constraint(sum, Sense::EQ, 1.0, "hull");
  // Hull and point both live in [0, 1] per column, so every slack is at most 1 in
  // magnitude once the point is clipped; a wider box keeps unclipped points exact.
  double box = 1.0;
  for (double v : point) box = std::max(box, std::abs(v) + 1.0);
  const int t = p == HullNorm::LInf ? m.add_continuous("t", 0.0, box) : -1;
  std::vector<Term> obj;
  for (std::size_t q = 0; q < point.size(); ++q) {
    const int sp = m.add_continuous("sp" + std::to_string(q), 0.0, box);
    const int sm = m.add_continuous("sm" + std::to_string(q), 0.0, box);
    std::vector<Term> row;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double v = data.encoded_row(rows[r])[q];
      if (v != 0.0) row.push_back({lam[r], v});
    }
    row.push_back({sp, -1.0});
    row.push_back({sm, 1.0});
    m.add_constraint(row, Sense::EQ, point[q], "hull");
    if (p == HullNorm::L1) {
      obj.push_back({sp, 1.0});
      obj.push_back({sm, 1.0});
    } else {
      m.add_constraint({{sp, 1.0}, {t, -1.0}}, Sense::LE, 0.0, "hull");
      m.add_constraint({{sm, 1.0}, {t, -1.0}}, Sense::LE, 0.0, "hull");
    }
  }
  if (p == HullNorm::LInf) obj.push_back({t, 1.0});
  m.set_objective(obj);
  const LpResult lp = solve_lp(m);
  if (lp.status != LpStatus::Optimal) throw Error(std::string("hull LP ended ") + to_string(lp.status));
  HullCertificate c;
  c.distance = std::max(0.0, lp.objective);
  c.violation = std::max(0.0, c.distance - epsilon);
  c.inside = c.distance <= epsilon + 1e-6;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (lp.x[static_cast<std::size_t>(lam[r])] > 1e-9) c.lambda.emplace_back(rows[r], lp.x[static_cast<std::size_t>(lam[r])]);
  return c;
}

}  // namespace cfmip
