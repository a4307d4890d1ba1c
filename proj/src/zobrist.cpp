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

#include "shedcep/zobrist.hpp"

#include <random>
#include <unordered_set>

namespace shedcep {

ZobristKeys::ZobristKeys(std::size_t type_count, int frequency_bins,
                         std::vector<int> attribute_bins, std::uint64_t seed)
    : type_count_(type_count),
      frequency_bins_(frequency_bins),
      attribute_bins_(std::move(attribute_bins)),
      seed_(seed) {
  if (frequency_bins_ < 1) throw ConfigError("zobrist: need at least one frequency bin");
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> seen;
  auto draw = [&] {
    while (true) {
      const std::uint64_t v = rng();
      if (v != 0 && seen.insert(v).second) return v;
    }
  };
  freq_codes_.resize(type_count_ * static_cast<std::size_t>(frequency_bins_));
  for (auto& c : freq_codes_) c = draw();
  std::size_t offset = 0;
  for (int bins : attribute_bins_) {
    if (bins < 1) throw ConfigError("zobrist: attribute with no bins");
    attr_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(bins);
  }
  attr_codes_.resize(offset);
  for (auto& c : attr_codes_) c = draw();
}

std::uint64_t ZobristKeys::k1_init(std::span<const int> frequency_bins, XorTally* tally) const {
  std::uint64_t k1 = 0;
  for (std::size_t t = 0; t < frequency_bins.size(); ++t)
    k1 ^= frequency_code(static_cast<TypeId>(t), frequency_bins[t]);
  if (tally) tally->ops += frequency_bins.size();
  return k1;
}

std::uint64_t ZobristKeys::k1_update(std::uint64_t k1, TypeId t, int old_bin, int new_bin,
                                     XorTally* tally) const {
  if (tally) tally->ops += 2;
  return k1 ^ frequency_code(t, old_bin) ^ frequency_code(t, new_bin);
}

std::uint64_t ZobristKeys::key(std::uint64_t k1, std::span<const int> attribute_bins,
                               XorTally* tally) const {
  std::uint64_t k = k1;
  for (std::size_t a = 0; a < attribute_bins.size(); ++a) k ^= attribute_code(a, attribute_bins[a]);
  if (tally) tally->ops += attribute_bins.size();
  return k;
}

std::uint64_t ZobristKeys::key_of(const FeatureKey& features) const {
  return key(k1_init(features.freq), features.attrs);
}

ZobristKeys make_zobrist_keys(const StreamSchema& schema, const PaneConfig& pane, std::uint64_t seed) {
  std::vector<int> attr_bins;
  for (const auto& a : schema.attributes()) attr_bins.push_back(a.bin_count());
  return ZobristKeys(schema.type_count(), pane.frequency_bins(), std::move(attr_bins), seed);
}

PaneKey::PaneKey(const ZobristKeys& keys, const PaneConfig& pane)
    : keys_(&keys), pane_(pane) {
  std::vector<int> zero(keys.type_count(), 0);
  k1_ = keys.k1_init(zero);
}

void PaneKey::reset(std::span<const int> frequencies) {
  std::vector<int> bins(frequencies.size());
  for (std::size_t t = 0; t < bins.size(); ++t) bins[t] = pane_.bin_frequency(frequencies[t]);
  k1_ = keys_->k1_init(bins);
}

void PaneKey::apply(std::span<const FreqChange> changes, XorTally* tally) {
  for (const auto& c : changes) {
    const int old_bin = pane_.bin_frequency(c.old_count);
    const int new_bin = pane_.bin_frequency(c.new_count);
    if (old_bin != new_bin) k1_ = keys_->k1_update(k1_, c.type, old_bin, new_bin, tally);
  }
}

}  // namespace shedcep
