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
 * @file config.hpp
 * @brief Criteria configuration for counterfactual generation and its JSON form.
 */
#pragma once

#include <limits>
#include <map>
#include <set>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cfmip/common.hpp"
#include "cfmip/learners.hpp"
#include "cfmip/milp.hpp"
#include "cfmip/embed.hpp"
#include "cfmip/solver.hpp"

namespace cfmip {

enum class DistanceKind { L1, L2Pwl };
enum class Weighting { Unit, Mad };
enum class SparsityMode { Off, Hard, Penalty };
enum class ManifoldMode { Off, Hard, Soft, Clustered };
enum class DiversityMode { Pool, Iterative };
enum class IterativeStrategy { FeatureExclusion, Distance, PerCluster };

/// x_i = x̂_i + c(p) - c(p̂) for an endogenous feature i with parents p.
struct CausalRelation {
  enum class Mechanism { ExplicitLinear, Learned };
  std::string endogenous;
  std::vector<std::string> parents;
  Mechanism mechanism = Mechanism::ExplicitLinear;
  /// Explicit mechanisms: one coefficient per parent, original units.
  Vector coefficients;
  /// Learned mechanisms: a model over the parents' encoded columns that
  /// predicts the endogenous feature in scaled units.
  std::shared_ptr<const TrainedModel> model;
};

/// Linear constraint over features in original units. Categorical terms use
/// "feature=level" and refer to that level's indicator.
struct UserConstraint {
  std::vector<std::pair<std::string, double>> terms;
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

struct CeConfig {
  // Validity
  std::optional<std::string> target_class;  // default: the class the model does not predict
  std::optional<Target> regression_target;  // regression models only
  double margin = kDefaultMargin;

  // Proximity
  DistanceKind distance = DistanceKind::L2Pwl;
  Weighting weighting = Weighting::Unit;
  std::map<std::string, double> feature_weights;  // multiplies the base weight
  int pwl_breakpoints = 8;

  // Sparsity
  SparsityMode sparsity = SparsityMode::Off;
  int max_changes = 1;  // K
  double alpha = 0.1;

  bool coherence = true;

  // Actionability
  bool actionability = true;
  std::map<std::string, Actionability> actionability_overrides;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> transition_overrides;

  // Manifold
  ManifoldMode manifold = ManifoldMode::Off;
  double epsilon = 0.0;
  bool p_infinity = false;  // p = 1 otherwise
  double beta = 1.0;
  int clusters = 3;
  std::uint64_t cluster_seed = 7;

  std::vector<CausalRelation> causality;

  // Diversity
  DiversityMode diversity = DiversityMode::Pool;
  int m = 1;
  PoolMode pool_mode = PoolMode::AllFeasible;
  IterativeStrategy strategy = IterativeStrategy::FeatureExclusion;
  double tau = 0.05;

  std::vector<UserConstraint> extra_constraints;

  // Solver
  double time_limit = 30.0;
  long node_limit = 200000;
  double gap_tol = 1e-6;

  void validate() const {
    if (sparsity == SparsityMode::Hard && max_changes < 1) throw ConfigError("sparsity K must be >= 1");
    if (alpha < 0 || beta < 0 || epsilon < 0) throw ConfigError("alpha, beta and epsilon must be >= 0");
    if (margin < 0) throw ConfigError("margin must be >= 0");
    if (m < 1) throw ConfigError("m must be >= 1");
    if (pwl_breakpoints < 2) throw ConfigError("pwl_breakpoints must be >= 2");
    if (manifold == ManifoldMode::Clustered && clusters < 1) throw ConfigError("clusters must be >= 1");
    if (!(tau > 0)) throw ConfigError("tau must be > 0");
    for (const auto& [name, w] : feature_weights)
      if (!(w > 0)) throw ConfigError("weight for '" + name + "' must be > 0");
    if (diversity == DiversityMode::Iterative && strategy == IterativeStrategy::PerCluster &&
        manifold != ManifoldMode::Clustered)
      throw ConfigError("per-cluster diversity needs the clustered manifold");
  }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class E>
E lookup(const std::map<std::string, E>& table, const std::string& key, const char* what) {
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError(std::string("unknown ") + what + " '" + key + "'");
  return it->second;
}

template <class E>
std::string reverse_lookup(const std::map<std::string, E>& table, E value) {
  for (const auto& [k, v] : table)
    if (v == value) return k;
  return "?";
}

inline const std::map<std::string, DistanceKind>& distance_names() {
  static const std::map<std::string, DistanceKind> t{{"l1", DistanceKind::L1}, {"l2-pwl", DistanceKind::L2Pwl}};
  return t;
}
inline const std::map<std::string, SparsityMode>& sparsity_names() {
  static const std::map<std::string, SparsityMode> t{
      {"off", SparsityMode::Off}, {"hard", SparsityMode::Hard}, {"penalty", SparsityMode::Penalty}};
  return t;
}
inline const std::map<std::string, ManifoldMode>& manifold_names() {
  static const std::map<std::string, ManifoldMode> t{{"off", ManifoldMode::Off},
                                                     {"hard", ManifoldMode::Hard},
                                                     {"soft", ManifoldMode::Soft},
                                                     {"clustered", ManifoldMode::Clustered}};
  return t;
}
inline const std::map<std::string, IterativeStrategy>& strategy_names() {
  static const std::map<std::string, IterativeStrategy> t{{"feature-exclusion", IterativeStrategy::FeatureExclusion},
                                                          {"distance", IterativeStrategy::Distance},
                                                          {"per-cluster", IterativeStrategy::PerCluster}};
  return t;
}
inline const std::map<std::string, Sense>& sense_names() {
  static const std::map<std::string, Sense> t{{"<=", Sense::LE}, {"=", Sense::EQ}, {">=", Sense::GE}};
  return t;
}

}  // namespace detail

/// Reads a configuration document. Unknown keys are rejected so that typos
/// do not silently fall back to defaults.
inline CeConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "target",     "margin",      "distance",  "sparsity",   "coherence",         "actionability",
      "manifold",   "causality",   "diversity", "constraints", "solver",           "name",
      "description"};
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown configuration key '" + k + "'");
  CeConfig c;
  try {
    if (j.contains("target")) {
      const auto& t = j.at("target");
      if (t.is_string()) {
        c.target_class = t.get<std::string>();
      } else {
        const std::string dir = t.at("direction").get<std::string>();
        const double v = t.at("value").get<double>();
        const double d = t.value("margin", kDefaultMargin);
        if (dir == "at-most")
          c.regression_target = Target::at_most(v, d);
        else if (dir == "at-least")
          c.regression_target = Target::at_least(v, d);
        else
          throw ConfigError("regression direction must be at-most or at-least");
      }
    }
    c.margin = j.value("margin", c.margin);
    if (j.contains("distance")) {
      const auto& d = j.at("distance");
      c.distance = detail::lookup(detail::distance_names(), d.value("kind", std::string("l2-pwl")), "distance");
      const std::string w = d.value("weighting", std::string("unit"));
      if (w == "unit")
        c.weighting = Weighting::Unit;
      else if (w == "mad")
        c.weighting = Weighting::Mad;
      else
        throw ConfigError("unknown weighting '" + w + "'");
      if (d.contains("weights")) c.feature_weights = d.at("weights").get<std::map<std::string, double>>();
      c.pwl_breakpoints = d.value("breakpoints", c.pwl_breakpoints);
    }
    if (j.contains("sparsity")) {
      const auto& s = j.at("sparsity");
      c.sparsity = detail::lookup(detail::sparsity_names(), s.value("mode", std::string("off")), "sparsity mode");
      c.max_changes = s.value("K", c.max_changes);
      c.alpha = s.value("alpha", c.alpha);
    }
    c.coherence = j.value("coherence", c.coherence);
    if (j.contains("actionability")) {
      const auto& a = j.at("actionability");
      if (a.is_boolean()) {
        c.actionability = a.get<bool>();
      } else {
        c.actionability = a.value("enabled", true);
        if (a.contains("overrides"))
          for (const auto& [name, cls] : a.at("overrides").items())
            c.actionability_overrides[name] = parse_actionability(cls.get<std::string>());
        if (a.contains("transitions"))
          c.transition_overrides =
              a.at("transitions").get<std::map<std::string, std::map<std::string, std::vector<std::string>>>>();
      }
    }
    if (j.contains("manifold")) {
      const auto& mf = j.at("manifold");
      c.manifold = detail::lookup(detail::manifold_names(), mf.value("mode", std::string("off")), "manifold mode");
      c.epsilon = mf.value("epsilon", c.epsilon);
      const auto p = mf.value("p", nlohmann::json(1));
      if (p.is_string() && (p == "inf" || p == "infinity"))
        c.p_infinity = true;
      else if (p.is_number() && p.get<double>() == 1.0)
        c.p_infinity = false;
      else
        throw ConfigError("manifold p must be 1 or \"inf\"");
      c.beta = mf.value("beta", c.beta);
      c.clusters = mf.value("k", c.clusters);
      c.cluster_seed = mf.value("seed", c.cluster_seed);
    }
    if (j.contains("causality")) {
      for (const auto& r : j.at("causality")) {
        CausalRelation rel;
        rel.endogenous = r.at("endogenous").get<std::string>();
        rel.parents = r.at("parents").get<std::vector<std::string>>();
        const std::string mech = r.value("mechanism", std::string("explicit-linear"));
        if (mech == "explicit-linear") {
          rel.mechanism = CausalRelation::Mechanism::ExplicitLinear;
          rel.coefficients = r.at("coefficients").get<Vector>();
        } else if (mech == "learned") {
          rel.mechanism = CausalRelation::Mechanism::Learned;
          if (r.contains("model")) rel.model = std::make_shared<TrainedModel>(model_from_json(r.at("model")));
        } else {
          throw ConfigError("unknown causal mechanism '" + mech + "'");
        }
        c.causality.push_back(std::move(rel));
      }
    }
    if (j.contains("diversity")) {
      const auto& d = j.at("diversity");
      const std::string mode = d.value("mode", std::string("pool"));
      if (mode == "pool")
        c.diversity = DiversityMode::Pool;
      else if (mode == "iterative")
        c.diversity = DiversityMode::Iterative;
      else
        throw ConfigError("unknown diversity mode '" + mode + "'");
      c.m = d.value("m", c.m);
      if (d.contains("pool_mode")) c.pool_mode = parse_pool_mode(d.at("pool_mode").get<std::string>());
      if (d.contains("strategy"))
        c.strategy = detail::lookup(detail::strategy_names(), d.at("strategy").get<std::string>(), "strategy");
      c.tau = d.value("tau", c.tau);
    }
    if (j.contains("constraints")) {
      for (const auto& u : j.at("constraints")) {
        UserConstraint uc;
        for (const auto& [name, coef] : u.at("terms").items()) uc.terms.emplace_back(name, coef.get<double>());
        uc.sense = detail::lookup(detail::sense_names(), u.at("sense").get<std::string>(), "sense");
        uc.rhs = u.at("rhs").get<double>();
        c.extra_constraints.push_back(std::move(uc));
      }
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.time_limit = s.value("time_limit", c.time_limit);
      c.node_limit = s.value("node_limit", c.node_limit);
      c.gap_tol = s.value("gap", c.gap_tol);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("configuration JSON: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

inline nlohmann::json config_to_json(const CeConfig& c) {
  nlohmann::json j;
  if (c.target_class) j["target"] = *c.target_class;
  if (c.regression_target)
    j["target"] = {{"direction", c.regression_target->kind == Target::Kind::AtMost ? "at-most" : "at-least"},
                   {"value", c.regression_target->value},
                   {"margin", c.regression_target->margin}};
  j["margin"] = c.margin;
  j["distance"] = {{"kind", detail::reverse_lookup(detail::distance_names(), c.distance)},
                   {"weighting", c.weighting == Weighting::Unit ? "unit" : "mad"},
                   {"breakpoints", c.pwl_breakpoints}};
  if (!c.feature_weights.empty()) j["distance"]["weights"] = c.feature_weights;
  j["sparsity"] = {{"mode", detail::reverse_lookup(detail::sparsity_names(), c.sparsity)},
                   {"K", c.max_changes},
                   {"alpha", c.alpha}};
  j["coherence"] = c.coherence;
  nlohmann::json act{{"enabled", c.actionability}};
  for (const auto& [k, v] : c.actionability_overrides) act["overrides"][k] = to_string(v);
  if (!c.transition_overrides.empty()) act["transitions"] = c.transition_overrides;
  j["actionability"] = act;
  j["manifold"] = {{"mode", detail::reverse_lookup(detail::manifold_names(), c.manifold)},
                   {"epsilon", c.epsilon},
                   {"p", c.p_infinity ? nlohmann::json("inf") : nlohmann::json(1)},
                   {"beta", c.beta},
                   {"k", c.clusters},
                   {"seed", c.cluster_seed}};
  j["causality"] = nlohmann::json::array();
  for (const auto& r : c.causality) {
    nlohmann::json jr{{"endogenous", r.endogenous}, {"parents", r.parents}};
    if (r.mechanism == CausalRelation::Mechanism::ExplicitLinear) {
      jr["mechanism"] = "explicit-linear";
      jr["coefficients"] = r.coefficients;
    } else {
      jr["mechanism"] = "learned";
      if (r.model) jr["model"] = model_to_json(*r.model);
    }
    j["causality"].push_back(std::move(jr));
  }
  j["diversity"] = {{"mode", c.diversity == DiversityMode::Pool ? "pool" : "iterative"},
                    {"m", c.m},
                    {"pool_mode", to_string(c.pool_mode)},
                    {"strategy", detail::reverse_lookup(detail::strategy_names(), c.strategy)},
                    {"tau", c.tau}};
  j["constraints"] = nlohmann::json::array();
  for (const auto& u : c.extra_constraints) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [name, coef] : u.terms) terms[name] = coef;
    j["constraints"].push_back(
        {{"terms", terms}, {"sense", detail::reverse_lookup(detail::sense_names(), u.sense)}, {"rhs", u.rhs}});
  }
  j["solver"] = {{"time_limit", c.time_limit}, {"node_limit", c.node_limit}, {"gap", c.gap_tol}};
  return j;
}

}  // namespace cfmip
