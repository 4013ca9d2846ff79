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
 * @file demo.hpp
 * @brief Staged demonstrations: one configuration per part, applied to one factual.
 *
 * A demo directory holds demo.json (dataset, model, parts) and one CeConfig
 * JSON per part. Learned causal mechanisms listed in demo.json are trained
 * before the parts run and attached to every part that declares the relation.
 */
#pragma once

#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfmip/evaluate.hpp"
#include "cfmip/generate.hpp"

namespace cfmip {

struct CausalSpec {
  std::string endogenous;
  std::vector<std::string> parents;
  Family family = Family::MLP;
  int folds = 5;
  std::vector<Hyperparams> candidates;
  std::uint64_t seed = 11;
};

struct DemoSpec {
  std::string name;
  std::string title;
  std::filesystem::path schema_path;
  std::filesystem::path data_path;
  Family family = Family::SVM;
  Hyperparams hyperparams;
  std::uint64_t seed = 1;
  int max_candidates = 50;
  std::optional<std::size_t> instance;
  std::vector<std::pair<std::string, std::filesystem::path>> parts;  // label, config file
  std::vector<CausalSpec> causal;
};

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

/// Directory holding the shipped demos.
inline std::filesystem::path default_demo_root() { return std::filesystem::path(CFMIP_SOURCE_DIR) / "data" / "demo"; }

inline DemoSpec load_demo(const std::string& name, const std::filesystem::path& root = default_demo_root()) {
  const auto dir = root / name;
  const auto j = read_json_file(dir / "demo.json");
  DemoSpec d;
  try {
    d.name = name;
    d.title = j.value("title", name);
    d.schema_path = dir / j.at("schema").get<std::string>();
    d.data_path = dir / j.at("data").get<std::string>();
    const auto& m = j.at("model");
    d.family = parse_family(m.at("family").get<std::string>());
    d.hyperparams = Hyperparams::from_json(m.value("hyperparams", nlohmann::json::object()));
    d.seed = m.value("seed", d.seed);
    if (j.contains("instance")) d.instance = j.at("instance").get<std::size_t>();
    d.max_candidates = j.value("max_candidates", d.max_candidates);
    for (const auto& p : j.at("parts")) d.parts.emplace_back(p.at("label").get<std::string>(), dir / p.at("config").get<std::string>());
    for (const auto& c : j.value("causal_models", nlohmann::json::array())) {
      CausalSpec s;
      s.endogenous = c.at("endogenous").get<std::string>();
      s.parents = c.at("parents").get<std::vector<std::string>>();
      s.family = parse_family(c.value("family", std::string("mlp")));
      s.folds = c.value("folds", s.folds);
      s.seed = c.value("seed", s.seed);
      for (const auto& h : c.at("candidates")) {
        Hyperparams hp = Hyperparams::from_json(h);
        hp.task = Task::Regression;
        s.candidates.push_back(hp);
      }
      d.causal.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("demo '" + name + "': " + e.what());
  }
  if (d.parts.empty()) throw ConfigError("demo '" + name + "' has no parts");
  return d;
}

// ---------------------------------------------------------------------------
// Learned causal mechanisms

struct CausalFit {
  std::shared_ptr<const TrainedModel> model;
  std::size_t chosen = 0;
  std::vector<double> cv_mse;  // per candidate
};

inline std::pair<Matrix, Vector> causal_training_set(const Dataset& data, const std::vector<std::string>& parents,
                                                     const std::string& endogenous) {
  const auto& schema = data.schema();
  const std::size_t e = schema.offset(schema.index_of(endogenous));
  Matrix X;
  Vector y;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto& row = data.encoded_row(r);
    Vector p;
    for (const auto& name : parents) {
      const auto j = schema.index_of(name);
      for (std::size_t k = 0; k < schema.feature(j).width(); ++k) p.push_back(row[schema.offset(j) + k]);
    }
    X.push_back(std::move(p));
    y.push_back(row[e]);
  }
  return {X, y};
}

/// Picks the candidate with the lowest k-fold mean squared error (ties: earlier),
/// then refits it on all rows.
inline CausalFit fit_causal(const Dataset& data, const CausalSpec& spec) {
  if (spec.candidates.empty()) throw ConfigError("causal model for '" + spec.endogenous + "' lists no candidates");
  if (spec.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  auto [X, y] = causal_training_set(data, spec.parents, spec.endogenous);
  std::vector<std::size_t> order(X.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  CausalFit fit;
  for (const auto& h : spec.candidates) {
    double sse = 0.0;
    for (int f = 0; f < spec.folds; ++f) {
      Matrix Xt, Xv;
      Vector yt, yv;
      for (std::size_t i = 0; i < order.size(); ++i) {
        const bool hold = static_cast<int>(i % static_cast<std::size_t>(spec.folds)) == f;
        (hold ? Xv : Xt).push_back(X[order[i]]);
        (hold ? yv : yt).push_back(y[order[i]]);
      }
      const TrainedModel m = train(Xt, yt, spec.family, h, spec.seed + static_cast<std::uint64_t>(f), Task::Regression);
      for (std::size_t i = 0; i < Xv.size(); ++i) {
        const double d = score(m, Xv[i]) - yv[i];
        sse += d * d;
      }
    }
    fit.cv_mse.push_back(sse / static_cast<double>(X.size()));
  }
  fit.chosen = static_cast<std::size_t>(std::min_element(fit.cv_mse.begin(), fit.cv_mse.end()) - fit.cv_mse.begin());
  fit.model = std::make_shared<TrainedModel>(train(X, y, spec.family, spec.candidates[fit.chosen], spec.seed, Task::Regression));
  return fit;
}

// ---------------------------------------------------------------------------
// Running

struct PartOutcome {
  std::string label;
  std::string description;
  CeConfig config;
  CeResult result;
  MetricsReport metrics;
};

struct DemoOutcome {
  std::string name;
  std::string title;
  std::size_t instance = 0;
  std::size_t candidates_tried = 0;
  std::vector<PartOutcome> parts;
  std::vector<CausalFit> causal;
  double model_accuracy = 0.0;
};

using PartList = std::vector<std::tuple<std::string, std::string, CeConfig>>;
using Progress = std::function<void(const std::string&)>;

/// Runs every part for one factual. Parts are solved last to first, since the
/// later parts carry more criteria and are the likeliest to fail; the first
/// failure throws InfeasibleError without a diagnosis.
inline std::vector<PartOutcome> run_parts(const Record& factual, const TrainedModel& model, const Dataset& data,
                                          const PartList& parts, const Progress& progress = {}) {
  std::vector<PartOutcome> out(parts.size());
  for (std::size_t k = parts.size(); k-- > 0;) {
    const auto& [label, desc, cfg] = parts[k];
    PartOutcome& p = out[k];
    p.label = label;
    p.description = desc;
    p.config = cfg;
    p.result = generate(factual, model, data, cfg, false);
    if (progress)
      progress(label + ": " + std::to_string(p.result.counterfactuals.size()) + " counterfactual(s), " +
               to_string(p.result.status) + ", " + format_fixed(p.result.wall_time, 2) + "s");
    if (p.result.counterfactuals.empty()) throw InfeasibleError({label + " found no counterfactual"});
    std::vector<Record> recs;
    for (const auto& ce : p.result.counterfactuals) recs.push_back(ce.record);
    p.metrics = score_set(factual, recs, model, data.schema(), p.result.target);
  }
  return out;
}

/// Trains the demo model, then walks the training rows in file order and keeps
/// the first row (predicted in the undesired class) for which every part has a
/// solution. A fixed \`instance\` in demo.json skips the search.
inline DemoOutcome run_demo(const DemoSpec& spec, const Progress& progress = {}) {
  const FeatureSchema schema = FeatureSchema::load(spec.schema_path.string());
  const Dataset data = load_csv(spec.data_path.string(), schema);
  const TrainedModel model = train(data, spec.family, spec.hyperparams, spec.seed);

  DemoOutcome out;
  out.name = spec.name;
  out.title = spec.title;
  out.model_accuracy = model.train_accuracy;
  for (const auto& c : spec.causal) out.causal.push_back(fit_causal(data, c));

  PartList parts;
  for (const auto& [label, path] : spec.parts) {
    const auto j = read_json_file(path);
    CeConfig cfg = config_from_json(j);
    for (auto& rel : cfg.causality) {
      if (rel.mechanism != CausalRelation::Mechanism::Learned || rel.model) continue;
      for (std::size_t k = 0; k < spec.causal.size(); ++k)
        if (spec.causal[k].endogenous == rel.endogenous && spec.causal[k].parents == rel.parents) rel.model = out.causal[k].model;
      if (!rel.model) throw ConfigError(label + ": no learned mechanism for '" + rel.endogenous + "'");
    }
    cfg.validate();
    parts.emplace_back(label, j.value("description", std::string()), std::move(cfg));
  }

  std::vector<std::size_t> candidates;
  if (spec.instance) {
    candidates.push_back(*spec.instance);
  } else {
    for (std::size_t r = 0; r < data.size() && static_cast<int>(candidates.size()) < spec.max_candidates; ++r)
      if (!predict_positive(model, data.encoded_row(r))) candidates.push_back(r);
  }
  std::string last_error = "no candidate rows";
  for (std::size_t r : candidates) {
    ++out.candidates_tried;
    if (progress) progress("trying row " + std::to_string(r));
    try {
      out.parts = run_parts(data.row(r), model, data, parts, progress);
      out.instance = r;
      return out;
    } catch (const InfeasibleError& e) {
      last_error = e.what();
    }
  }
  throw InfeasibleError({"demo: no factual admits every part (" + last_error + ")"});
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_value(const FeatureValue& v, const FeatureSpec& f) {
  if (f.categorical()) return as_level(v);
  std::ostringstream os;
  const double x = as_number(v);
  if (f.kind == FeatureKind::Integer || x == std::round(x))
    os << static_cast<long long>(std::llround(x));
  else
    os << std::fixed << std::setprecision(2) << x;
  return os.str();
}

/// Features as rows, the factual and each counterfactual as columns; unchanged cells print "--".
inline std::string format_ce_table(const CeResult& r, const FeatureSchema& schema) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"feature", "factual"};
  for (std::size_t k = 0; k < r.counterfactuals.size(); ++k) head.push_back(std::string("(") + static_cast<char>('a' + k % 26) + ")");
  cells.push_back(head);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    std::vector<std::string> line{f.name, format_value(r.factual[j], f)};
    for (const auto& ce : r.counterfactuals) line.push_back(ce.changed[j] ? format_value(ce.record[j], f) : "--");
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> w(head.size(), 0);
  for (const auto& l : cells)
    for (std::size_t c = 0; c < l.size(); ++c) w[c] = std::max(w[c], l[c].size());
  std::ostringstream os;
  for (const auto& l : cells) {
    for (std::size_t c = 0; c < l.size(); ++c) {
      if (c) os << "  ";
      os << l[c] << std::string(w[c] - l[c].size(), ' ');
    }
    os << "\n";
  }
  return os.str();
}

inline std::string format_demo(const DemoOutcome& d, const FeatureSchema& schema) {
  std::ostringstream os;
  os << d.title << "\n";
  os << "model training accuracy " << format_fixed(d.model_accuracy, 3) << "; factual row " << d.instance << " (rows tried "
     << d.candidates_tried << ")\n";
  for (std::size_t k = 0; k < d.causal.size(); ++k) {
    os << "learned mechanism " << k << ": candidate " << d.causal[k].chosen << " chosen, cv mse";
    for (double v : d.causal[k].cv_mse) os << " " << format_fixed(v, 5);
    os << "\n";
  }
  std::vector<AggregateRow> rows;
  for (const auto& p : d.parts) {
    os << "\n" << p.label;
    if (!p.description.empty()) os << ": " << p.description;
    os << "\n" << format_ce_table(p.result, schema);
    for (const auto& w : p.result.warnings) os << "warning: " << w << "\n";
    rows.push_back(aggregate({p.metrics}, p.label));
  }
  os << "\n" << format_table(rows);
  return os.str();
}

inline nlohmann::json demo_to_json(const DemoOutcome& d, const FeatureSchema& schema) {
  nlohmann::json j{{"engine_version", kVersion}, {"name", d.name},       {"title", d.title},
                   {"instance", d.instance},     {"model_accuracy", d.model_accuracy}};
  j["parts"] = nlohmann::json::array();
  for (const auto& p : d.parts) {
    j["parts"].push_back({{"label", p.label},
                          {"description", p.description},
                          {"config", config_to_json(p.config)},
                          {"result", result_to_json(p.result, schema)},
                          {"metrics", report_to_json(p.metrics)}});
  }
  return j;
}

}  // namespace cfmip
