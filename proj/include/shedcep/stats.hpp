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

#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "shedcep/engine.hpp"
#include "shedcep/event.hpp"

namespace shedcep {

enum class PaneMode { Count, Time };

struct PaneConfig {
  PaneMode mode = PaneMode::Count;
  /// Count mode: number of predecessor events kept.
  std::size_t length = 10;
  /// Time mode: events with ts in (t - seconds, t) form the pane of an
  /// event at t.
  double seconds = 0.0;
  /// Frequencies are clamped to this value before binning. In count mode
  /// it defaults to `length`.
  int max_frequency = 0;
  int frequency_bin_size = 1;

  void validate() const;
  int frequency_cap() const;
  /// Number of distinct binned frequency values.
  int frequency_bins() const;
  int bin_frequency(int f) const;
};

struct FreqChange {
  TypeId type;
  int old_count;
  int new_count;
};

/// Type frequencies over the last L events (or seconds) before the
/// current event, maintained incrementally.
class PredecessorPane {
 public:
  PredecessorPane(std::size_t type_count, PaneConfig config);

  /// Time mode only: drops events that fall out of the pane of an event at
  /// `ts`. Call before reading frequencies for that event.
  std::span<const FreqChange> expire(double ts);
  /// Appends an event; in count mode evicts the oldest one when full. The
  /// returned changes are already net per type (an add and evict of the
  /// same type cancel out).
  std::span<const FreqChange> push(TypeId type, double ts);

  const std::vector<int>& frequencies() const { return freq_; }
  std::size_t size() const { return buffer_.size(); }
  const PaneConfig& config() const { return config_; }
  /// Types in arrival order, oldest first.
  std::vector<TypeId> contents() const;

 private:
  void change(TypeId t, int delta);

  PaneConfig config_;
  std::vector<int> freq_;
  std::deque<std::pair<TypeId, double>> buffer_;
  std::vector<FreqChange> changes_;
};

/// (type, binned frequencies, binned attributes): the grouping key of
/// aggregated observations.
struct FeatureKey {
  TypeId type = 0;
  std::vector<int> freq;
  std::vector<int> attrs;

  friend auto operator<=>(const FeatureKey&, const FeatureKey&) = default;
  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
};

struct Observation {
  Seq seq = 0;
  FeatureKey key;
  /// Weights of every credit the event earned (complex events it is bound
  /// in, negation abandonments it caused).
  std::vector<double> credits;
};

struct AggregatedObservation {
  FeatureKey key;
  double M = 0.0;
  std::uint64_t O = 0;

  bool operator==(const AggregatedObservation&) const = default;
};

/// Groups observations by identical key; M sums credit weights, O counts.
/// Output is sorted by key.
std::vector<AggregatedObservation> aggregate(std::span<const Observation> observations);

/// U = M / O per group.
std::map<FeatureKey, double> utilities(std::span<const AggregatedObservation> groups);

/// Builds feature keys from the predecessor pane and collects observations
/// for a training prefix.
class FeatureTracker {
 public:
  FeatureTracker(const StreamSchema& schema, PaneConfig pane);

  /// Feature key of `e` against the current pane (the pane excludes `e`).
  /// In time mode this first expires stale pane entries.
  const FeatureKey& features_for(const Event& e);
  /// Pushes `e` into the pane and returns the resulting frequency changes.
  /// Expiry done by the preceding `features_for` is in `last_expiry()`.
  std::span<const FreqChange> commit(const Event& e);

  const PredecessorPane& pane() const { return pane_; }
  const StreamSchema& schema() const { return *schema_; }
  std::span<const FreqChange> last_expiry() const { return expired_; }

 private:
  const StreamSchema* schema_;
  PredecessorPane pane_;
  FeatureKey scratch_;
  std::vector<FreqChange> expired_;
};

class StatsCollector {
 public:
  StatsCollector(const StreamSchema& schema, PaneConfig pane);

  void observe(const Event& e);
  /// Copies credit weights from the engine ledger onto the collected
  /// observations. Call once all windows of the observed events closed.
  void attach_credits(const ContributionLedger& ledger);

  const std::vector<Observation>& observations() const { return observations_; }
  std::vector<Observation>& observations() { return observations_; }
  const FeatureTracker& tracker() const { return tracker_; }

 private:
  FeatureTracker tracker_;
  std::vector<Observation> observations_;
};

}  // namespace shedcep
