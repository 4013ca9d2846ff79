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
 * @file service.hpp
 * @brief JSON-over-HTTP front end.
 *
 * Routing is a plain function of (method, path, query, body) so it can be
 * exercised without sockets; serve() binds it to cpp-httplib.
 */
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "cfmip/evaluate.hpp"
#include "cfmip/generate.hpp"

namespace cfmip {

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

/// Thrown inside handlers to produce a specific status code.
class HttpError : public Error {
public:
  HttpError(int status, const std::string& msg, nlohmann::json extra = nlohmann::json::object())
      : Error(msg), status_(status), extra_(std::move(extra)) {}
  int status() const { return status_; }
  const nlohmann::json& extra() const { return extra_; }

private:
  int status_;
  nlohmann::json extra_;
};

class Service {
public:
  Service(FeatureSchema schema, Dataset data) : schema_(std::move(schema)), data_(std::move(data)) {}

  /// Registers a model under `id` (or a generated one) and returns the id.
  std::string add_model(TrainedModel model, std::string id = "") {
    std::unique_lock lock(mutex_);
    if (model.input_dim != schema_.width()) throw SchemaError("model input width does not match the schema");
    if (id.empty()) id = "model-" + std::to_string(++counter_);
    models_[id] = std::make_shared<const TrainedModel>(std::move(model));
    return id;
  }

  HttpReply handle(const std::string& method, const std::string& path, const std::map<std::string, std::string>& query,
                   const std::string& body) {
    HttpReply r;
    try {
      if (method == "GET" && path == "/schema") {
        r.body = {{"schema", schema_.to_json()}};
      } else if (method == "GET" && path == "/instances") {
        r.body = instances(query);
      } else if (method == "GET" && path == "/models") {
        r.body = list_models();
      } else if (method == "POST" && path == "/train") {
        r.body = train_model(parse(body));
      } else if (method == "POST" && path == "/explain") {
        r.body = explain(parse(body));
      } else if (method == "POST" && path == "/hull-check") {
        r.body = hull_check(parse(body));
      } else {
        throw HttpError(404, "no route " + method + " " + path);
      }
    } catch (const HttpError& e) {
      r.status = e.status();
      r.body = e.extra();
      r.body["error"] = e.what();
    } catch (const InfeasibleError& e) {
      r.status = 409;
      r.body = {{"error", e.what()}, {"tags", e.tags()}};
    } catch (const nlohmann::json::exception& e) {
      r.status = 400;
      r.body = {{"error", std::string("malformed request: ") + e.what()}};
    } catch (const ParseError& e) {
      r.status = 400;
      r.body = {{"error", e.what()}};
    } catch (const SchemaError& e) {
      r.status = 422;
      r.body = {{"error", e.what()}};
    } catch (const ConfigError& e) {
      r.status = 422;
      r.body = {{"error", e.what()}};
    } catch (const CoherenceError& e) {
      r.status = 422;
      r.body = {{"error", e.what()}};
    } catch (const std::exception& e) {
      r.status = 500;
      r.body = {{"error", e.what()}};
    }
    r.body["engine_version"] = kVersion;
    return r;
  }

  const FeatureSchema& schema() const { return schema_; }
  const Dataset& data() const { return data_; }

private:
  static nlohmann::json parse(const std::string& body) {
    try {
      auto j = nlohmann::json::parse(body);
      if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw HttpError(400, std::string("body is not JSON: ") + e.what());
    }
  }

  nlohmann::json instances(const std::map<std::string, std::string>& query) const {
    std::size_t limit = 20;
    if (auto it = query.find("limit"); it != query.end()) {
      try {
        const long v = std::stol(it->second);
        if (v < 0) throw std::invalid_argument("negative");
        limit = static_cast<std::size_t>(v);
      } catch (const std::exception&) {
        throw HttpError(400, "limit must be a non-negative integer");
      }
    }
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min(limit, data_.size()); ++i) {
      nlohmann::json row{{"row", i}, {"record", record_to_json(data_.row(i), schema_)}};
      const double y = data_.labels()[i];
      if (schema_.is_classification())
        row["label"] = schema_.label_levels()[static_cast<std::size_t>(y)];
      else
        row["label"] = y;
      rows.push_back(std::move(row));
    }
    return {{"instances", rows}, {"total", data_.size()}};
  }

  nlohmann::json list_models() const {
    std::shared_lock lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, m] : models_) {
      nlohmann::json e{{"model_id", id}, {"family", m->trained_as}, {"kind", m->kind_name()}};
      if (std::isfinite(m->train_accuracy)) e["train_accuracy"] = m->train_accuracy;
      out.push_back(std::move(e));
    }
    return {{"models", out}};
  }

  nlohmann::json train_model(const nlohmann::json& req) {
    const Family fam = parse_family(req.at("family").get<std::string>());
    const Hyperparams h = Hyperparams::from_json(req.value("hyperparams", nlohmann::json::object()));
    const auto seed = req.value("seed", std::uint64_t{1});
    TrainedModel m = train(data_, fam, h, seed);
    const double acc = m.train_accuracy;
    const std::string id = add_model(std::move(m));
    nlohmann::json out{{"model_id", id}};
    if (std::isfinite(acc)) out["train_accuracy"] = acc;
    return out;
  }

  std::shared_ptr<const TrainedModel> model(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = models_.find(id);
    if (it == models_.end()) throw HttpError(404, "unknown model_id '" + id + "'");
    return it->second;
  }

  Record instance(const nlohmann::json& req) const {
    const auto& inst = req.at("instance");
    const bool by_row = inst.contains("row"), inline_rec = inst.contains("record");
    if (by_row == inline_rec) throw HttpError(400, "instance needs exactly one of 'row' or 'record'");
    if (by_row) {
      const auto row = inst.at("row").get<long>();
      if (row < 0 || static_cast<std::size_t>(row) >= data_.size()) throw HttpError(422, "row index out of range");
      return data_.row(static_cast<std::size_t>(row));
    }
    Record r = record_from_json(inst.at("record"), schema_);
    encode(r, schema_);  // rejects unknown levels and malformed values
    return r;
  }

  nlohmann::json explain(const nlohmann::json& req) const {
    const auto mdl = model(req.at("model_id").get<std::string>());
    const Record factual = instance(req);
    nlohmann::json cj = req.value("config", nlohmann::json::object());
    if (req.contains("target")) cj["target"] = req.at("target");
    if (req.contains("m")) {
      const int m = req.at("m").get<int>();
      if (m < 1) throw HttpError(400, "m must be at least 1");
      if (!cj.contains("diversity")) cj["diversity"] = nlohmann::json::object();
      cj["diversity"]["m"] = m;
    }
    const CeConfig cfg = config_from_json(cj);
    const CeResult res = generate(factual, *mdl, data_, cfg);
    nlohmann::json out = result_to_json(res, schema_);
    if (!res.counterfactuals.empty()) {
      std::vector<Record> recs;
      for (const auto& c : res.counterfactuals) recs.push_back(c.record);
      const MetricsReport rep = score_set(factual, recs, *mdl, schema_, res.target);
      out["metrics"] = report_to_json(rep);
      out["degraded"] = rep.validity != 1.0;
    } else {
      out["degraded"] = true;
    }
    return out;
  }

  nlohmann::json hull_check(const nlohmann::json& req) const {
    const Record rec = record_from_json(req.at("point"), schema_);
    const Vector x = encode(rec, schema_);
    const double eps = req.value("epsilon", 0.0);
    if (!(eps >= 0.0)) throw HttpError(400, "epsilon must be non-negative");
    HullNorm p = HullNorm::L1;
    if (req.contains("p")) {
      const auto& jp = req.at("p");
      if (jp.is_string() && jp.get<std::string>() == "inf")
        p = HullNorm::LInf;
      else if (!(jp.is_number() && jp.get<double>() == 1.0))
        throw HttpError(400, "p must be 1 or \"inf\"");
    }
    std::vector<std::size_t> rows;
    const auto& cls = req.at("class");
    if (schema_.is_classification())
      rows = class_indices(data_, cls.get<std::string>());
    else
      throw HttpError(422, "hull-check by class needs a classification dataset");
    if (rows.empty()) throw HttpError(422, "class has no rows");
    const HullCertificate c = hull_membership(x, data_, rows, eps, p);
    nlohmann::json lam = nlohmann::json::array();
    for (const auto& [row, w] : c.lambda) lam.push_back({{"row", row}, {"weight", w}});
    return {{"inside", c.inside}, {"distance", c.distance}, {"violation", c.violation}, {"lambda", lam}};
  }

  FeatureSchema schema_;
  Dataset data_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const TrainedModel>> models_;
  long counter_ = 0;
};

/// Binds the service to cpp-httplib. Each request runs its own solve.
inline void bind_routes(httplib::Server& server, Service& svc) {
  auto forward = [&svc](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> q;
    for (const auto& [k, v] : req.params) q[k] = v;
    const HttpReply r = svc.handle(req.method, req.path, q, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  for (const char* p : {"/schema", "/instances", "/models"}) server.Get(p, forward);
  for (const char* p : {"/train", "/explain", "/hull-check"}) server.Post(p, forward);
  // Anything else still gets a JSON 404 from handle().
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Delete(".*", forward);
}

}  // namespace cfmip
