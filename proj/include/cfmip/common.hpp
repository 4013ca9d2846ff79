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
 * @file common.hpp
 * @brief Error types and shared numeric tolerances.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cfmip {

inline constexpr const char* kVersion = "0.3.0";

/// Scaled-space threshold above which a numeric feature counts as changed.
inline constexpr double kChangeTol = 1e-6;
/// Feasibility tolerance used by solver checks and pool admission.
inline constexpr double kFeasTol = 1e-6;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV/JSON) with row/column context.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, long row = -1, long col = -1)
      : Error(format(msg, row, col)), row_(row), col_(col) {}
  long row() const { return row_; }
  long col() const { return col_; }

private:
  static std::string format(const std::string& msg, long row, long col) {
    std::string out = msg;
    if (row >= 0) out += " (row " + std::to_string(row);
    if (col >= 0) out += (row >= 0 ? ", column " : " (column ") + std::to_string(col);
    if (row >= 0 || col >= 0) out += ")";
    return out;
  }
  long row_;
  long col_;
};

/// Record or vector that violates the feature schema.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// One-hot group that does not decode to a single level.
class CoherenceError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class TrainingDivergence : public Error {
public:
  TrainingDivergence(int epoch)
      : Error("training diverged: non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const { return epoch_; }

private:
  int epoch_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// The assembled model has no feasible point. `tags` names the smallest set of
/// criterion groups found to conflict.
class InfeasibleError : public Error {
public:
  explicit InfeasibleError(std::vector<std::string> tags)
      : Error(describe(tags)), tags_(std::move(tags)) {}
  const std::vector<std::string>& tags() const { return tags_; }

private:
  static std::string describe(const std::vector<std::string>& tags) {
    std::string s = "infeasible model; conflicting criteria:";
    for (const auto& t : tags) s += " " + t;
    return s;
  }
  std::vector<std::string> tags_;
};

}  // namespace cfmip
