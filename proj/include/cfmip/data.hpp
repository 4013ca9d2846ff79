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
 * @file data.hpp
 * @brief Tabular schema, CSV ingestion and the encoded (one-hot + min-max) space.
 *
 * Every optimization in the library happens in the encoded space: categorical
 * features become one 0/1 column per level and numeric features are mapped to
 * [0,1] with the schema bounds. Reports convert back with decode().
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cfmip/common.hpp"

namespace cfmip {

using Vector = std::vector<double>;

enum class FeatureKind { Continuous, Integer, Categorical };

enum class Actionability {
  Free,
  Immutable,
  NonDecreasing,
  NonIncreasing,
  NonNegative,
  Conditional
};

inline std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Integer: return "integer";
    case FeatureKind::Categorical: return "categorical";
  }
  return "?";
}

inline std::string to_string(Actionability a) {
  switch (a) {
    case Actionability::Free: return "free";
    case Actionability::Immutable: return "immutable";
    case Actionability::NonDecreasing: return "non-decreasing";
    case Actionability::NonIncreasing: return "non-increasing";
    case Actionability::NonNegative: return "non-negative";
    case Actionability::Conditional: return "conditional";
  }
  return "?";
}

inline FeatureKind parse_kind(const std::string& s) {
  if (s == "continuous" || s == "real") return FeatureKind::Continuous;
  if (s == "integer") return FeatureKind::Integer;
  if (s == "categorical") return FeatureKind::Categorical;
  throw SchemaError("unknown feature kind '" + s + "'");
}

inline Actionability parse_actionability(const std::string& s) {
  if (s == "free" || s.empty()) return Actionability::Free;
  if (s == "immutable") return Actionability::Immutable;
  if (s == "non-decreasing") return Actionability::NonDecreasing;
  if (s == "non-increasing") return Actionability::NonIncreasing;
  if (s == "non-negative") return Actionability::NonNegative;
  if (s == "conditional") return Actionability::Conditional;
  throw SchemaError("unknown actionability '" + s + "'");
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  std::vector<std::string> levels;  // categorical only
  double lower = 0.0;
  double upper = 1.0;
  Actionability actionability = Actionability::Free;
  /// Conditional actionability: level -> levels it may move to (itself implied).
  std::map<std::string, std::vector<std::string>> allowed_transitions;

  bool categorical() const { return kind == FeatureKind::Categorical; }
  bool numeric() const { return kind != FeatureKind::Categorical; }
  std::size_t width() const { return categorical() ? levels.size() : 1; }

  std::optional<std::size_t> level_index(const std::string& level) const {
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
  }
};

/// A value in original units: a number for numeric features, a level name for
/// categorical ones.
using FeatureValue = std::variant<double, std::string>;
using Record = std::vector<FeatureValue>;

inline double as_number(const FeatureValue& v) { return std::get<double>(v); }
inline const std::string& as_level(const FeatureValue& v) { return std::get<std::string>(v); }

class FeatureSchema {
public:
  FeatureSchema() = default;

  FeatureSchema(std::vector<FeatureSpec> features, std::string label_column = "label",
                std::vector<std::string> label_levels = {})
      : features_(std::move(features)),
        label_column_(std::move(label_column)),
        label_levels_(std::move(label_levels)) {
    validate();
    index();
  }

  const std::vector<FeatureSpec>& features() const { return features_; }
  const FeatureSpec& feature(std::size_t j) const { return features_.at(j); }
  std::size_t size() const { return features_.size(); }
  const std::string& label_column() const { return label_column_; }
  /// Binary classification labels; index 1 is the positive class. Empty for regression.
  const std::vector<std::string>& label_levels() const { return label_levels_; }
  bool is_classification() const { return !label_levels_.empty(); }

  /// Number of encoded columns n.
  std::size_t width() const { return width_; }
  /// First encoded column of feature j.
  std::size_t offset(std::size_t j) const { return offsets_.at(j); }
  std::size_t feature_of_column(std::size_t col) const { return column_owner_.at(col); }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t j = 0; j < features_.size(); ++j)
      if (features_[j].name == name) return j;
    return std::nullopt;
  }
  std::size_t index_of(const std::string& name) const {
    auto j = find(name);
    if (!j) throw SchemaError("unknown feature '" + name + "'");
    return *j;
  }

  /// Label string -> numeric class (0/1). Throws on unknown levels.
  double label_value(const std::string& label) const {
    if (!is_classification()) {
      try {
        return std::stod(label);
      } catch (const std::exception&) {
        throw SchemaError("non-numeric regression target '" + label + "'");
      }
    }
    for (std::size_t i = 0; i < label_levels_.size(); ++i)
      if (label_levels_[i] == label) return static_cast<double>(i);
    throw SchemaError("unknown label '" + label + "'");
  }

  static FeatureSchema from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  static FeatureSchema load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schema file '" + path + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("schema JSON: ") + e.what());
    }
    return from_json(doc);
  }

private:
  void validate() const {
    std::set<std::string> names;
    for (const auto& f : features_) {
      if (!names.insert(f.name).second) throw SchemaError("duplicate feature name '" + f.name + "'");
      if (f.categorical()) {
        if (f.levels.empty()) throw SchemaError("categorical feature '" + f.name + "' has no levels");
        std::set<std::string> lv(f.levels.begin(), f.levels.end());
        if (lv.size() != f.levels.size())
          throw SchemaError("duplicate level in feature '" + f.name + "'");
        for (const auto& [from, tos] : f.allowed_transitions) {
          if (!lv.count(from)) throw SchemaError("transition from unknown level '" + from + "'");
          for (const auto& to : tos)
            if (!lv.count(to)) throw SchemaError("transition to unknown level '" + to + "'");
        }
      } else {
        if (!(f.lower <= f.upper)) throw SchemaError("feature '" + f.name + "' has lower > upper");
        if (f.actionability == Actionability::Conditional)
          throw SchemaError("conditional actionability needs a categorical feature ('" + f.name + "')");
      }
    }
    if (label_levels_.size() == 1 || label_levels_.size() > 2)
      throw SchemaError("label_levels must name exactly two classes");
  }

  void index() {
    offsets_.clear();
    column_owner_.clear();
    width_ = 0;
    for (std::size_t j = 0; j < features_.size(); ++j) {
      offsets_.push_back(width_);
      for (std::size_t k = 0; k < features_[j].width(); ++k) column_owner_.push_back(j);
      width_ += features_[j].width();
    }
  }

  std::vector<FeatureSpec> features_;
  std::string label_column_ = "label";
  std::vector<std::string> label_levels_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> column_owner_;
  std::size_t width_ = 0;
};

inline FeatureSchema FeatureSchema::from_json(const nlohmann::json& doc) {
  try {
    std::vector<FeatureSpec> feats;
    for (const auto& jf : doc.at("features")) {
      FeatureSpec f;
      f.name = jf.at("name").get<std::string>();
      f.kind = parse_kind(jf.value("kind", std::string("continuous")));
      if (f.categorical()) {
        f.levels = jf.at("levels").get<std::vector<std::string>>();
      } else {
        f.lower = jf.at("lower").get<double>();
        f.upper = jf.at("upper").get<double>();
      }
      f.actionability = parse_actionability(jf.value("actionability", std::string("free")));
      if (jf.contains("allowed_transitions"))
        f.allowed_transitions =
            jf.at("allowed_transitions").get<std::map<std::string, std::vector<std::string>>>();
      feats.push_back(std::move(f));
    }
    std::vector<std::string> labels;
    if (doc.contains("label_levels")) labels = doc.at("label_levels").get<std::vector<std::string>>();
    return FeatureSchema(std::move(feats), doc.value("label_column", std::string("label")),
                         std::move(labels));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema JSON: ") + e.what());
  }
}

inline nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json doc;
  doc["label_column"] = label_column_;
  if (!label_levels_.empty()) doc["label_levels"] = label_levels_;
  auto& arr = doc["features"] = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json jf{{"name", f.name}, {"kind", to_string(f.kind)},
                      {"actionability", to_string(f.actionability)}};
    if (f.categorical()) {
      jf["levels"] = f.levels;
    } else {
      jf["lower"] = f.lower;
      jf["upper"] = f.upper;
    }
    if (!f.allowed_transitions.empty()) jf["allowed_transitions"] = f.allowed_transitions;
    arr.push_back(std::move(jf));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Encoding

inline double scale_value(double v, const FeatureSpec& f) {
  const double range = f.upper - f.lower;
  return range > 0 ? (v - f.lower) / range : 0.0;
}

inline double unscale_value(double s, const FeatureSpec& f) {
  return f.lower + s * (f.upper - f.lower);
}

/// One-hot + min-max encoding of a record. Numerics outside the schema box are
/// clipped and reported through `clipped`.
inline Vector encode(const Record& record, const FeatureSchema& schema, bool* clipped = nullptr) {
  if (record.size() != schema.size())
    throw SchemaError("record has " + std::to_string(record.size()) + " values, schema expects " +
                      std::to_string(schema.size()));
  Vector out(schema.width(), 0.0);
  bool any_clip = false;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    const std::size_t col = schema.offset(j);
    if (f.categorical()) {
      if (!std::holds_alternative<std::string>(record[j]))
        throw SchemaError("feature '" + f.name + "' expects a level name");
      auto li = f.level_index(as_level(record[j]));
      if (!li) throw SchemaError("unknown level '" + as_level(record[j]) + "' for feature '" + f.name + "'");
      out[col + *li] = 1.0;
    } else {
      if (!std::holds_alternative<double>(record[j]))
        throw SchemaError("feature '" + f.name + "' expects a number");
      double v = as_number(record[j]);
      if (!std::isfinite(v)) throw SchemaError("non-finite value for feature '" + f.name + "'");
      if (v < f.lower || v > f.upper) {
        any_clip = true;
        v = std::clamp(v, f.lower, f.upper);
      }
      out[col] = scale_value(v, f);
    }
  }
  if (clipped) *clipped = any_clip;
  return out;
}

/// Inverse of encode(). Integer features are rounded; `rounded` reports a
/// rounding residual above 1e-6 in original units.
inline Record decode(const Vector& v, const FeatureSchema& schema, bool* rounded = nullptr) {
  if (v.size() != schema.width())
    throw SchemaError("encoded vector has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(schema.width()));
  constexpr double tol = 1e-6;
  Record out;
  out.reserve(schema.size());
  bool any_round = false;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& f = schema.feature(j);
    const std::size_t col = schema.offset(j);
    if (f.categorical()) {
      double sum = 0.0;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < f.width(); ++k) {
        sum += v[col + k];
        if (v[col + k] > v[col + arg]) arg = k;
      }
      if (std::abs(sum - 1.0) > tol || v[col + arg] < 1.0 - tol)
        throw CoherenceError("one-hot group '" + f.name + "' is not coherent (sum " +
                             std::to_string(sum) + ")");
      out.emplace_back(f.levels[arg]);
    } else {
      double val = unscale_value(v[col], f);
      if (f.kind == FeatureKind::Integer) {
        const double r = std::round(val);
        if (std::abs(r - val) > tol) any_round = true;
        val = r;
      }
      out.emplace_back(val);
    }
  }
  if (rounded) *rounded = any_round;
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

class Dataset {
public:
  Dataset() = default;

  /// Builds a dataset from original-space records; labels are numeric class
  /// indices (classification) or real targets (regression).
  Dataset(FeatureSchema schema, std::vector<Record> rows, Vector labels)
      : schema_(std::move(schema)), rows_(std::move(rows)), labels_(std::move(labels)) {
    if (rows_.size() != labels_.size()) throw SchemaError("rows and labels differ in length");
    encoded_.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      try {
        encoded_.push_back(encode(rows_[i], schema_));
      } catch (const SchemaError& e) {
        throw ParseError(e.what(), static_cast<long>(i + 1));
      }
    }
  }

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<Record>& rows() const { return rows_; }
  const Record& row(std::size_t i) const { return rows_.at(i); }
  const Vector& labels() const { return labels_; }
  const std::vector<Vector>& encoded() const { return encoded_; }
  const Vector& encoded_row(std::size_t i) const { return encoded_.at(i); }
  std::size_t width() const { return schema_.width(); }

  /// Per encoded column (min, max) in original units; (0, 1) for one-hot columns.
  std::vector<std::pair<double, double>> scale_params() const {
    std::vector<std::pair<double, double>> p;
    for (const auto& f : schema_.features())
      for (std::size_t k = 0; k < f.width(); ++k)
        p.emplace_back(f.categorical() ? 0.0 : f.lower, f.categorical() ? 1.0 : f.upper);
    return p;
  }

  /// Copy restricted to the given row indices.
  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d;
    d.schema_ = schema_;
    for (auto i : idx) {
      d.rows_.push_back(rows_.at(i));
      d.labels_.push_back(labels_.at(i));
      d.encoded_.push_back(encoded_.at(i));
    }
    return d;
  }

private:
  FeatureSchema schema_;
  std::vector<Record> rows_;
  Vector labels_;
  std::vector<Vector> encoded_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

inline double parse_number(const std::string& tok, long row, long col) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("non-numeric token '" + tok + "'", row, col);
  }
  if (used != tok.size() || !std::isfinite(v)) throw ParseError("non-numeric token '" + tok + "'", row, col);
  return v;
}

}  // namespace detail

/// Parses a comma-separated file with a header row. Columns are matched to the
/// schema by name; rows and columns in errors are 1-based data rows / 0-based columns.
inline Dataset load_csv(std::istream& in, const FeatureSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV input");
  auto header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);
  auto column_of = [&](const std::string& name) -> long {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing column '" + name + "'", 0);
    return static_cast<long>(it - header.begin());
  };
  std::vector<long> cols;
  for (const auto& f : schema.features()) cols.push_back(column_of(f.name));
  const long label_col = column_of(schema.label_column());

  std::vector<Record> rows;
  Vector labels;
  long row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(cells.size()),
                       row);
    Record rec;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema.feature(j);
      const std::string tok = detail::trim(cells[static_cast<std::size_t>(cols[j])]);
      if (f.categorical()) {
        if (!f.level_index(tok))
          throw ParseError("unknown level '" + tok + "' for feature '" + f.name + "'", row, cols[j]);
        rec.emplace_back(tok);
      } else {
        rec.emplace_back(detail::parse_number(tok, row, cols[j]));
      }
    }
    const std::string lab = detail::trim(cells[static_cast<std::size_t>(label_col)]);
    try {
      labels.push_back(schema.label_value(lab));
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), row, label_col);
    }
    rows.push_back(std::move(rec));
  }
  return Dataset(schema, std::move(rows), std::move(labels));
}

inline Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file '" + path + "'");
  return load_csv(in, schema);
}

/// Indices of the rows labelled `label`; the set must be nonempty.
inline std::vector<std::size_t> class_indices(const Dataset& data, double label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.labels()[i] == label) idx.push_back(i);
  if (idx.empty()) throw SchemaError("no rows carry the requested class; manifold region undefined");
  return idx;
}

inline std::vector<std::size_t> class_indices(const Dataset& data, const std::string& label) {
  return class_indices(data, data.schema().label_value(label));
}

// ---------------------------------------------------------------------------
// Record JSON helpers

inline nlohmann::json record_to_json(const Record& r, const FeatureSchema& schema) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const auto& name = schema.feature(k).name;
    if (std::holds_alternative<double>(r[k]))
      j[name] = as_number(r[k]);
    else
      j[name] = as_level(r[k]);
  }
  return j;
}

inline Record record_from_json(const nlohmann::json& j, const FeatureSchema& schema) {
  Record r;
  for (const auto& f : schema.features()) {
    if (!j.contains(f.name)) throw SchemaError("record is missing feature '" + f.name + "'");
    const auto& v = j.at(f.name);
    if (f.categorical()) {
      if (!v.is_string()) throw SchemaError("feature '" + f.name + "' expects a level name");
      if (!f.level_index(v.get<std::string>()))
        throw SchemaError("unknown level '" + v.get<std::string>() + "' for feature '" + f.name + "'");
      r.emplace_back(v.get<std::string>());
    } else {
      if (!v.is_number()) throw SchemaError("feature '" + f.name + "' expects a number");
      r.emplace_back(v.get<double>());
    }
  }
  return r;
}

}  // namespace cfmip
