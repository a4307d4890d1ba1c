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

#include "shedcep/stats.hpp"

#include <algorithm>

namespace shedcep {

void PaneConfig::validate() const {
  if (mode == PaneMode::Count && length == 0) throw ConfigError("pane length must be at least 1");
  if (mode == PaneMode::Time && !(seconds > 0.0)) throw ConfigError("time-based pane needs seconds > 0");
  if (mode == PaneMode::Time && max_frequency < 1)
    throw ConfigError("time-based pane needs max_frequency >= 1");
  if (frequency_bin_size < 1) throw ConfigError("frequency bin size must be at least 1");
}

int PaneConfig::frequency_cap() const {
  if (max_frequency > 0) return max_frequency;
  return static_cast<int>(length);
}

int PaneConfig::frequency_bins() const { return frequency_cap() / frequency_bin_size + 1; }

int PaneConfig::bin_frequency(int f) const {
  return std::min(f, frequency_cap()) / frequency_bin_size;
}

PredecessorPane::PredecessorPane(std::size_t type_count, PaneConfig config)
    : config_(config), freq_(type_count, 0) {
  config_.validate();
}

void PredecessorPane::change(TypeId t, int delta) {
  const int old = freq_[t];
  freq_[t] += delta;
  for (auto& c : changes_) {
    if (c.type == t) {
      c.new_count = freq_[t];
      return;
    }
  }
  changes_.push_back({t, old, freq_[t]});
}

std::span<const FreqChange> PredecessorPane::expire(double ts) {
  changes_.clear();
  if (config_.mode == PaneMode::Time) {
    while (!buffer_.empty() && buffer_.front().second <= ts - config_.seconds) {
      change(buffer_.front().first, -1);
      buffer_.pop_front();
    }
    std::erase_if(changes_, [](const FreqChange& c) { return c.old_count == c.new_count; });
  }
  return changes_;
}

std::span<const FreqChange> PredecessorPane::push(TypeId type, double ts) {
  changes_.clear();
  if (config_.mode == PaneMode::Count && buffer_.size() == config_.length) {
    change(buffer_.front().first, -1);
    buffer_.pop_front();
  }
  buffer_.emplace_back(type, ts);
  change(type, +1);
  std::erase_if(changes_, [](const FreqChange& c) { return c.old_count == c.new_count; });
  return changes_;
}

std::vector<TypeId> PredecessorPane::contents() const {
  std::vector<TypeId> out;
  for (const auto& [t, ts] : buffer_) out.push_back(t);
  return out;
}

std::vector<AggregatedObservation> aggregate(std::span<const Observation> observations) {
  std::map<FeatureKey, std::pair<double, std::uint64_t>> groups;
  for (const auto& ob : observations) {
    auto& g = groups[ob.key];
    for (double w : ob.credits) g.first += w;
    ++g.second;
  }
  std::vector<AggregatedObservation> out;
  out.reserve(groups.size());
  for (auto& [key, mo] : groups) out.push_back({key, mo.first, mo.second});
  return out;
}

std::map<FeatureKey, double> utilities(std::span<const AggregatedObservation> groups) {
  std::map<FeatureKey, double> out;
  for (const auto& g : groups) {
    if (g.O == 0) throw ConfigError("aggregated observation with O = 0");
    out[g.key] = g.M / static_cast<double>(g.O);
  }
  return out;
}

FeatureTracker::FeatureTracker(const StreamSchema& schema, PaneConfig pane)
    : schema_(&schema), pane_(schema.type_count(), pane) {
  scratch_.freq.resize(schema.type_count());
  scratch_.attrs.resize(schema.attribute_count());
}

const FeatureKey& FeatureTracker::features_for(const Event& e) {
  auto expired = pane_.expire(e.ts);
  expired_.assign(expired.begin(), expired.end());
  scratch_.type = e.type;
  const auto& f = pane_.frequencies();
  const auto& cfg = pane_.config();
  for (std::size_t t = 0; t < f.size(); ++t) scratch_.freq[t] = cfg.bin_frequency(f[t]);
  schema_->bin_attributes(e, scratch_.attrs);
  return scratch_;
}

std::span<const FreqChange> FeatureTracker::commit(const Event& e) {
  return pane_.push(e.type, e.ts);
}

StatsCollector::StatsCollector(const StreamSchema& schema, PaneConfig pane)
    : tracker_(schema, pane) {}

void StatsCollector::observe(const Event& e) {
  Observation ob;
  ob.seq = e.seq;
  ob.key = tracker_.features_for(e);
  tracker_.commit(e);
  observations_.push_back(std::move(ob));
}

void StatsCollector::attach_credits(const ContributionLedger& ledger) {
  for (auto& ob : observations_) {
    ob.credits.clear();
    if (auto* credits = ledger.find(ob.seq))
      for (const auto& c : *credits) ob.credits.push_back(c.weight);
  }
}

}  // namespace shedcep
