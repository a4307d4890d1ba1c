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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shedcep/config.hpp"
#include "shedcep/engine.hpp"
#include "shedcep/shedder.hpp"
#include "shedcep/synthetic.hpp"

namespace shedcep {

inline constexpr const char* kReportSchema = "shedcep-report/1";

/// Service time per admitted event in simulated seconds. Throughput is
/// mu = 1 / cost.
struct CostModel {
  double per_event = 0.002;
  /// Optional per-type override, indexed by type id.
  std::vector<double> per_type;
  /// Charged for every drop decision while a shedder is configured.
  double shed_cost = 0.0;

  double cost(TypeId type) const {
    return type < per_type.size() ? per_type[type] : per_event;
  }
  void validate() const;
};

enum class ClockMode { Simulated, WallClock };

struct ExperimentConfig {
  std::string name = "experiment";

  /// Stream source: synthetic spec, or a file read against `schema`.
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::filesystem::path> stream_file;
  StreamSchema file_schema;
  /// Canonical description of the stream source for report identities.
  OrderedJson dataset_identity;

  Json queries;

  std::size_t training_events = 100000;
  std::size_t evaluation_events = 20000;
  TrainOptions train;
  /// false: load `model_file` instead of training.
  bool train_model = true;
  std::optional<std::filesystem::path> model_file;
  /// Retrain every N processed events (0 = never).
  std::size_t retrain_interval = 0;

  ShedderConfig shedder;
  double rate_multiplier = 1.4;
  CostModel cost;
  ClockMode clock = ClockMode::Simulated;
  /// Producer queue capacity in wall-clock mode.
  std::size_t queue_capacity = 1 << 16;
  EngineOptions engine;

  std::uint64_t stream_seed = 1;
};

/// Parses the experiment file. Relative paths resolve against `base_dir`.
/// Unknown keys are rejected with their full path.
ExperimentConfig parse_experiment(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct ExperimentData {
  StreamSchema schema;
  std::vector<Pattern> patterns;
  std::vector<Event> events;
};

ExperimentData load_experiment_data(const ExperimentConfig& config);

struct TrainingOutcome {
  ShedderModel model;
  std::vector<AggregatedObservation> groups;
};

/// Matches the training prefix without shedding, collects observations
/// and fits the configured model.
TrainingOutcome train_on_prefix(const ExperimentConfig& config, const ExperimentData& data);

/// Detections of an unshedded engine run.
std::vector<ComplexEvent> ground_truth(const std::vector<Pattern>& patterns, const std::vector<Event>& events,
                                       EngineOptions options = {});

struct PatternQoR {
  std::string id;
  double weight = 1.0;
  std::uint64_t ground_truth = 0;
  std::uint64_t detected = 0;
  std::uint64_t false_negatives = 0;
  std::uint64_t false_positives = 0;

  double fn_percent() const;
  double fp_percent() const;
  bool operator==(const PatternQoR&) const = default;
};

struct QoRReport {
  std::string name;
  OrderedJson identity;
  std::string shedder;
  double rate_multiplier = 0.0;
  double latency_bound = 0.0;
  std::string clock;

  std::vector<PatternQoR> patterns;

  std::uint64_t events = 0;
  std::uint64_t dropped = 0;
  std::uint64_t activations = 0;
  /// Index (within the evaluation segment) of the first activation.
  std::optional<std::uint64_t> first_activation;
  std::uint64_t steady_events = 0;
  std::uint64_t steady_dropped = 0;
  double mean_queue_latency = 0.0;
  double steady_queue_latency = 0.0;

  double latency_p50 = 0.0;
  double latency_p99 = 0.0;
  double latency_max = 0.0;
  std::uint64_t violations = 0;

  std::uint64_t total_ground_truth() const;
  std::uint64_t total_false_negatives() const;
  std::uint64_t total_false_positives() const;
  /// sum_q w_q * FP_q + sum_q w_q * FN_q
  double weighted_objective() const;
  double drop_ratio() const;
  double steady_drop_ratio() const;

  OrderedJson to_json() const;
  static QoRReport from_json(const Json& doc);
  std::string to_csv() const;
  bool operator==(const QoRReport&) const = default;
};

/// Per-pattern FN/FP from the sorted ground-truth and detection sets.
std::vector<PatternQoR> score_detections(const std::vector<Pattern>& patterns,
                                         const std::vector<ComplexEvent>& truth,
                                         const std::vector<ComplexEvent>& detected);

/// Runs the evaluation segment through engine + shedder with `model`.
QoRReport run_with_model(const ExperimentConfig& config, const ExperimentData& data,
                         std::shared_ptr<const ShedderModel> model);
/// Full pipeline: load data, train or load the model, run.
QoRReport run_experiment(const ExperimentConfig& config);

enum class TableFormat { Csv, Json };

/// Side-by-side table; all reports must share one identity.
std::string compare_reports(const std::vector<QoRReport>& reports, TableFormat format);

}  // namespace shedcep
