/*
 *
 * Copyright 2026 shedcep authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

// Command-line entry point: generate, train, run, compare, inspect-model.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "shedcep/expr.hpp"
#include "shedcep/harness.hpp"
#include "shedcep/model_io.hpp"
#include "shedcep/stream_io.hpp"

namespace {

using namespace shedcep;

constexpr int kExitConfig = 2;
constexpr int kExitLatency = 3;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_generate(const std::string& config, const std::vector<std::string>& overrides, std::string out) {
  const auto cfg = load_experiment(config, overrides);
  if (!cfg.synthetic) throw ConfigError("dataset: generate needs a synthetic dataset");
  const auto events = generate_synthetic(*cfg.synthetic);
  if (out.empty()) out = cfg.name + ".csv";
  write_stream(std::filesystem::path(out), events, cfg.synthetic->schema());
  std::cerr << "wrote " << events.size() << " events to " << out << '\n';
  return 0;
}

int cmd_train(const std::string& config, const std::vector<std::string>& overrides, std::string model_out,
              const std::string& groups_out) {
  const auto cfg = load_experiment(config, overrides);
  if (cfg.shedder.kind == ShedderKind::None) throw ConfigError("shedder.kind: 'none' has nothing to train");
  const auto data = load_experiment_data(cfg);
  const auto outcome = train_on_prefix(cfg, data);
  if (model_out.empty()) model_out = cfg.model_file ? cfg.model_file->string() : cfg.name + ".model.json";
  save_model(outcome.model, model_out);
  if (!groups_out.empty()) {
    std::ofstream g(groups_out);
    if (!g) throw std::runtime_error("cannot write " + groups_out);
    write_groups_csv(outcome.groups, data.schema, g);
  }
  std::cerr << "trained " << to_string(outcome.model.kind) << " on " << cfg.training_events << " events ("
            << outcome.groups.size() << " aggregated observations) -> " << model_out << '\n';
  return 0;
}

int cmd_run(const std::string& config, const std::vector<std::string>& overrides, const std::string& json_out,
            const std::string& csv_out, bool assert_lb) {
  const auto cfg = load_experiment(config, overrides);
  const auto report = run_experiment(cfg);
  write_text(json_out, report.to_json().dump(2) + "\n");
  if (!csv_out.empty()) write_text(csv_out, report.to_csv());
  if (assert_lb && report.violations > 0) {
    std::cerr << "latency bound violated by " << report.violations << " events (max "
              << report.latency_max << " s)\n";
    return kExitLatency;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& format, const std::string& out) {
  std::vector<QoRReport> reports;
  for (const auto& f : files) reports.push_back(QoRReport::from_json(load_json_file(f)));
  write_text(out, compare_reports(reports, format == "json" ? TableFormat::Json : TableFormat::Csv));
  return 0;
}

int cmd_inspect(const std::string& model) {
  std::cout << describe_model(load_model(model));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load-shedding CEP experiments"};
  app.require_subcommand(1);

  std::string config, out, model_out, groups_out, json_out, csv_out, format = "csv", model;
  std::vector<std::string> overrides, reports;
  bool assert_lb = false;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override a config key, e.g. --set shedder.kind=bl");
  };

  auto* gen = app.add_subcommand("generate", "Write the synthetic dataset of a config as a stream file");
  add_config(gen);
  gen->add_option("-o,--out", out, "Output stream file");

  auto* train = app.add_subcommand("train", "Train the configured shedder model on the training prefix");
  add_config(train);
  train->add_option("-m,--model", model_out, "Output model file");
  train->add_option("--groups", groups_out, "Dump aggregated observations as CSV");

  auto* run = app.add_subcommand("run", "Run an experiment and emit its QoR report");
  add_config(run);
  run->add_option("--json", json_out, "Report JSON path (default: stdout)");
  run->add_option("--csv", csv_out, "Report CSV path");
  run->add_flag("--assert-lb", assert_lb, "Exit 3 if any event exceeds the latency bound");

  auto* cmp = app.add_subcommand("compare", "Tabulate reports of the same experiment side by side");
  cmp->add_option("reports", reports, "Report JSON files")->required()->check(CLI::ExistingFile);
  cmp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmp->add_option("-o,--out", out, "Output path (default: stdout)");

  auto* inspect = app.add_subcommand("inspect-model", "Summarize a model file");
  inspect->add_option("model", model, "Model file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return cmd_generate(config, overrides, out);
    if (*train) return cmd_train(config, overrides, model_out, groups_out);
    if (*run) return cmd_run(config, overrides, json_out, csv_out, assert_lb);
    if (*cmp) return cmd_compare(reports, format, out);
    if (*inspect) return cmd_inspect(model);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ExprError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StreamParseError& e) {
    std::cerr << "stream error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
