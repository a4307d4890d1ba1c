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

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shedcep/engine.hpp"
#include "shedcep/pattern.hpp"
#include "shedcep/stats.hpp"
#include "shedcep/utility_model.hpp"
#include "shedcep/zobrist.hpp"

namespace shedcep {

enum class ShedderKind { None, GspiceH, GspiceT, GspiceF, Espice, Bl };

ShedderKind parse_shedder_kind(const std::string& name);
std::string to_string(ShedderKind kind);
bool uses_utility_model(ShedderKind kind);

/// Occurrence counts of utilities over a training stream, quantized to
/// 1e-3 so thresholds live on a fixed grid.
class UtilityHistogram {
 public:
  static constexpr double kResolution = 1e-3;
  static std::int64_t quantize(double u);
  static double value_of(std::int64_t quantum) { return static_cast<double>(quantum) * kResolution; }

  void add(double utility, std::uint64_t count = 1);
  void add_quantum(std::int64_t quantum, std::uint64_t count);
  bool empty() const { return total_ == 0; }
  std::uint64_t total() const { return total_; }
  const std::map<std::int64_t, std::uint64_t>& counts() const { return counts_; }
  /// Fraction of occurrences with quantized utility <= quantum.
  double cumulative(std::int64_t quantum) const;

  bool operator==(const UtilityHistogram&) const = default;

 private:
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// A drop threshold on the quantized utility grid. Events whose quantized
/// utility is <= `quantum` are dropped.
struct UtilityThreshold {
  static constexpr std::int64_t kDropNothing = std::numeric_limits<std::int64_t>::min();
  std::int64_t quantum = kDropNothing;

  bool drops(double utility) const {
    return quantum != kDropNothing && UtilityHistogram::quantize(utility) <= quantum;
  }
  double value() const {
    return quantum == kDropNothing ? -std::numeric_limits<double>::infinity()
                                   : UtilityHistogram::value_of(quantum);
  }
};

/// Smallest utility u whose cumulative occurrence fraction reaches rho;
/// rho = 0 yields a threshold below every utility.
UtilityThreshold select_threshold(const UtilityHistogram& hist, double rho);

/// rho = clamp(1 - mu/lambda + queue_len / (lambda * interval), 0, rho_max).
double estimate_rho(double lambda, double mu, double queue_len, double interval, double rho_max = 0.95);

/// Hysteresis on queueing latency: on at >= on_fraction * LB, off at
/// <= off_fraction * LB.
class OverloadDetector {
 public:
  OverloadDetector(double latency_bound, double on_fraction = 0.8, double off_fraction = 0.5);
  bool update(double queue_latency);
  bool overloaded() const { return overloaded_; }

 private:
  double on_;
  double off_;
  bool overloaded_ = false;
};

class Ewma {
 public:
  explicit Ewma(double alpha) : alpha_(alpha) {}
  void add(double x) {
    value_ = seeded_ ? alpha_ * x + (1.0 - alpha_) * value_ : x;
    seeded_ = true;
  }
  bool seeded() const { return seeded_; }
  double value() const { return value_; }

 private:
  double alpha_;
  double value_ = 0.0;
  bool seeded_ = false;
};

/// Utility per (type, position-in-window bin), learned from contribution
/// credits the same way as M/O.
struct EspiceModel {
  double window_size = 0.0;
  double slide = 0.0;
  int position_bin = 5;
  std::size_t type_count = 0;
  /// utility[type][bin]; unseen bins fall back to the type default.
  std::vector<std::vector<double>> utility;
  std::vector<double> default_utility;

  int bin_of(std::size_t position) const { return static_cast<int>(position) / position_bin; }
  double lookup(TypeId type, std::size_t position) const;
  bool operator==(const EspiceModel&) const = default;
};

/// Position of each event inside the oldest open window that contains it,
/// counting every input event (dropped or not).
class WindowPositionTracker {
 public:
  WindowPositionTracker(double window_size, double slide);
  std::size_t position(double ts) const;
  void push(double ts);

 private:
  double size_;
  double slide_;
  std::optional<double> first_start_;
  std::deque<double> recent_;
};

/// Type scores proportional to pattern repetition (weighted) and window
/// frequency; drops are uniform random within each type.
struct BlModel {
  std::vector<double> score;
  std::vector<double> share;

  /// Per-type drop probabilities realizing an overall fraction rho, filling
  /// lowest-score types first.
  std::vector<double> drop_probabilities(double rho) const;
  bool operator==(const BlModel&) const = default;
};

/// Everything a shedder needs after training.
struct ShedderModel {
  ShedderKind kind = ShedderKind::None;
  StreamSchema schema;
  PaneConfig pane;
  std::shared_ptr<const UtilityModel> utility;
  UtilityHistogram histogram;
  EspiceModel espice;
  BlModel bl;
};

struct TrainOptions {
  ShedderKind kind = ShedderKind::GspiceH;
  PaneConfig pane;
  DefaultUtility default_utility = DefaultUtility::Mean;
  std::uint64_t zobrist_seed = 7;
  std::uint64_t forest_seed = 11;
  TreeParams tree;
  int forest_trees = RandomForest::kDefaultTrees;
  int espice_position_bin = 5;
};

/// Inputs of training: the training prefix, its per-event features with
/// credits attached, and the queries it was matched against.
struct TrainingData {
  const StreamSchema* schema = nullptr;
  const std::vector<Pattern>* patterns = nullptr;
  const std::vector<Event>* events = nullptr;
  const std::vector<Observation>* observations = nullptr;
};

ShedderModel train_shedder(const TrainingData& data, const TrainOptions& options);

struct ShedderConfig {
  ShedderKind kind = ShedderKind::None;
  double latency_bound = 1.0;
  double safety_fraction = 0.8;
  double off_fraction = 0.5;
  /// In stream time units; <= 0 means the slide of the first pattern. The
  /// harness converts it to the arrival clock.
  double drop_interval = 0.0;
  double rho_max = 0.95;
  double ewma_alpha = 0.3;
  std::uint64_t seed = 5;
};

/// Load observed when an event reaches the head of the queue.
struct LoadSample {
  double now = 0.0;
  double arrival = 0.0;
  std::size_t queue_length = 0;
};

struct ShedderCounters {
  std::uint64_t seen = 0;
  std::uint64_t dropped = 0;
  std::uint64_t activations = 0;
  std::uint64_t rho_updates = 0;
};

/// Per-event drop decision with the load-control loop around it.
class Shedder {
 public:
  /// `interval` is the drop interval on the arrival clock.
  Shedder(ShedderConfig config, std::shared_ptr<const ShedderModel> model, double interval);

  /// Decides whether to drop `e` (true = drop). The predecessor pane and
  /// K1 advance whether or not the event is dropped.
  bool on_event(const Event& e, const LoadSample& load);
  /// Service time spent on an admitted event.
  void record_service(double cost);

  /// Algorithm 1 for the current state, without advancing the pane.
  bool drop(const Event& e);

  /// Replaces the model between events. The pane and K1 are kept.
  void swap_model(std::shared_ptr<const ShedderModel> model);

  /// Forces the overload state and target rho (tests, warm starts).
  void force_overload(bool on, double rho);
  /// Feeds `e` into the pane without any decision (warm-up).
  void warm(const Event& e);

  bool overloaded() const { return detector_.overloaded(); }
  double rho() const { return rho_; }
  UtilityThreshold threshold() const { return threshold_; }
  const ShedderCounters& counters() const { return counters_; }
  const XorTally& xor_tally() const { return tally_; }
  std::uint64_t k1() const { return pane_key_ ? pane_key_->k1() : 0; }
  std::optional<double> lambda() const;
  std::optional<double> mu() const;

 private:
  void set_rho(double rho);
  void maybe_update_rho(const Event& e, std::size_t queue_length);
  void advance_pane(const Event& e);
  double utility_of(const Event& e);

  ShedderConfig config_;
  std::shared_ptr<const ShedderModel> model_;
  double interval_;
  OverloadDetector detector_;
  Ewma lambda_;
  Ewma mu_;
  double rho_ = 0.0;
  UtilityThreshold threshold_;
  std::vector<double> bl_probabilities_;
  std::mt19937_64 rng_;

  std::optional<PredecessorPane> pane_;
  std::optional<PaneKey> pane_key_;
  std::optional<FeatureTracker> features_;
  std::vector<int> attr_bins_;
  std::optional<WindowPositionTracker> positions_;
  XorTally tally_;

  std::optional<double> interval_end_;
  std::uint64_t interval_arrivals_ = 0;
  std::optional<double> interval_first_arrival_;
  double last_arrival_ = 0.0;
  std::uint64_t interval_processed_ = 0;
  double interval_service_ = 0.0;
  ShedderCounters counters_;
};

}  // namespace shedcep
