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

// cfmip command-line front end: train, explain, evaluate, demo, serve.
//
// Exit codes: 0 success, 1 invalid arguments or configuration, 2 infeasible
// model (criterion tags on stderr), 3 input/output failure.

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

#include "cfmip/demo.hpp"
#include "cfmip/evaluate.hpp"
#include "cfmip/generate.hpp"
#include "cfmip/service.hpp"

namespace {

using namespace cfmip;

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

struct Loaded {
  FeatureSchema schema;
  Dataset data;
};

Loaded load_data(const std::string& schema_path, const std::string& data_path) {
  Loaded l;
  l.schema = FeatureSchema::load(schema_path);
  l.data = load_csv(data_path, l.schema);
  return l;
}

int run_train(const std::string& data, const std::string& schema, const std::string& family, std::uint64_t seed,
              const std::string& hyper, const std::string& out) {
  const Loaded l = load_data(schema, data);
  const Hyperparams h = hyper.empty() ? Hyperparams{} : Hyperparams::from_json(read_json_file(hyper));
  const TrainedModel m = train(l.data, parse_family(family), h, seed);
  write_json(out, model_to_json(m));
  std::cout << "trained " << family << " (" << m.kind_name() << ")";
  if (std::isfinite(m.train_accuracy)) std::cout << ", training accuracy " << format_fixed(m.train_accuracy, 3);
  std::cout << " -> " << out << "\n";
  return 0;
}

int run_explain(const std::string& model_path, const std::string& data, const std::string& schema, long instance,
                const std::string& record_path, const std::string& config_path, int m, const std::string& out) {
  const Loaded l = load_data(schema, data);
  const TrainedModel model = model_from_json(read_json_file(model_path));
  nlohmann::json cj = config_path.empty() ? nlohmann::json::object() : read_json_file(config_path);
  if (m > 0) {
    if (!cj.contains("diversity")) cj["diversity"] = nlohmann::json::object();
    cj["diversity"]["m"] = m;
  }
  const CeConfig cfg = config_from_json(cj);
  Record factual;
  if (!record_path.empty()) {
    factual = record_from_json(read_json_file(record_path), l.schema);
  } else {
    if (instance < 0 || static_cast<std::size_t>(instance) >= l.data.size())
      throw ConfigError("--instance out of range (dataset has " + std::to_string(l.data.size()) + " rows)");
    factual = l.data.row(static_cast<std::size_t>(instance));
  }
  const CeResult res = generate(factual, model, l.data, cfg);
  std::cout << format_ce_table(res, l.schema);
  for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
  std::vector<Record> recs;
  for (const auto& c : res.counterfactuals) recs.push_back(c.record);
  nlohmann::json j = result_to_json(res, l.schema);
  if (!recs.empty()) {
    const MetricsReport rep = score_set(factual, recs, model, l.schema, res.target);
    std::cout << "\n" << format_table({aggregate({rep}, "explain")});
    j["metrics"] = report_to_json(rep);
  }
  if (!out.empty()) {
    // Self-contained: evaluate needs only this file.
    j["schema"] = l.schema.to_json();
    j["model"] = model_to_json(model);
    write_json(out, j);
  }
  return 0;
}

int run_evaluate(const std::vector<std::string>& results) {
  std::vector<MetricsReport> reports;
  for (const auto& path : results) {
    const nlohmann::json j = read_json_file(path);
    if (!j.contains("schema") || !j.contains("model")) throw ConfigError(path + ": result lacks embedded schema/model");
    const FeatureSchema schema = FeatureSchema::from_json(j.at("schema"));
    const TrainedModel model = model_from_json(j.at("model"));
    const CeResult r = result_from_json(j, schema);
    if (r.counterfactuals.empty()) {
      std::cerr << path << ": no counterfactuals, skipped\n";
      continue;
    }
    std::vector<Record> recs;
    for (const auto& c : r.counterfactuals) recs.push_back(c.record);
    reports.push_back(score_set(r.factual, recs, model, schema, r.target));
  }
  if (reports.empty()) throw ConfigError("no result file carried counterfactuals");
  std::cout << format_table({aggregate(reports, std::to_string(reports.size()) + " instances")});
  return 0;
}

int run_demo_cmd(const std::string& name, const std::string& root, const std::string& out) {
  const DemoSpec spec = root.empty() ? load_demo(name) : load_demo(name, root);
  const FeatureSchema schema = FeatureSchema::load(spec.schema_path.string());
  const DemoOutcome d = run_demo(spec);
  std::cout << format_demo(d, schema);
  if (!out.empty()) write_json(out, demo_to_json(d, schema));
  return 0;
}

httplib::Server* g_server = nullptr;

int run_serve(int port, const std::string& host, const std::string& data, const std::string& schema,
              const std::vector<std::string>& models) {
  Loaded l = load_data(schema, data);
  Service svc(std::move(l.schema), std::move(l.data));
  for (const auto& path : models) {
    const std::string id = std::filesystem::path(path).stem().string();
    svc.add_model(model_from_json(read_json_file(path)), id);
    std::cerr << "loaded model " << id << "\n";
  }
  httplib::Server server;
  bind_routes(server, svc);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "cfmip " << kVersion << " listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfmip: counterfactual explanations by mixed-integer optimization"};
  app.set_version_flag("--version", std::string(cfmip::kVersion));
  app.require_subcommand(1);

  std::string data, schema, family = "lr", out, hyper, model, config, record, results_root, name, host = "127.0.0.1";
  std::uint64_t seed = 1;
  long instance = -1;
  int m = 0, port = 8080;
  std::vector<std::string> results, models;

  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--data", data, "CSV file")->required();
  tr->add_option("--schema", schema, "schema JSON")->required();
  tr->add_option("--family", family, "lr|svm|cart|rf|mlp")->required();
  tr->add_option("--seed", seed, "random seed");
  tr->add_option("--hyperparams", hyper, "hyperparameter JSON file");
  tr->add_option("--out", out, "model JSON output")->required();

  auto* ex = app.add_subcommand("explain", "generate counterfactuals for one instance");
  ex->add_option("--model", model, "model JSON")->required();
  ex->add_option("--data", data, "CSV file")->required();
  ex->add_option("--schema", schema, "schema JSON")->required();
  auto* inst = ex->add_option("--instance", instance, "training row index");
  auto* rec = ex->add_option("--record", record, "factual record JSON file");
  inst->excludes(rec);
  ex->add_option("--config", config, "criteria configuration JSON");
  ex->add_option("-m", m, "number of counterfactuals (overrides the config)")->check(CLI::PositiveNumber);
  ex->add_option("--out", out, "result JSON output");

  auto* ev = app.add_subcommand("evaluate", "score saved results");
  ev->add_option("--results", results, "result JSON files written by explain --out")->required();

  auto* de = app.add_subcommand("demo", "run a staged demonstration");
  de->add_option("--name", name, "german-credit|heart")->required()->check(CLI::IsMember({"german-credit", "heart"}));
  de->add_option("--demo-root", results_root, "directory holding demo definitions");
  de->add_option("--out", out, "demo JSON output");

  auto* sv = app.add_subcommand("serve", "run the HTTP service");
  sv->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  sv->add_option("--host", host, "bind address");
  sv->add_option("--data", data, "CSV file")->required();
  sv->add_option("--schema", schema, "schema JSON")->required();
  sv->add_option("--model", models, "model JSON files to preload (id = file stem)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*tr) return run_train(data, schema, family, seed, hyper, out);
    if (*ex) {
      if (instance < 0 && record.empty()) throw cfmip::ConfigError("explain needs --instance or --record");
      return run_explain(model, data, schema, instance, record, config, m, out);
    }
    if (*ev) return run_evaluate(results);
    if (*de) return run_demo_cmd(name, results_root, out);
    if (*sv) return run_serve(port, host, data, schema, models);
  } catch (const cfmip::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cfmip::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cfmip::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
