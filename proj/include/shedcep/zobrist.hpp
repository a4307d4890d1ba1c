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
#include <span>
#include <vector>

#include "shedcep/event.hpp"
#include "shedcep/stats.hpp"

namespace shedcep {

/// Counts XOR operations on the shedding path.
struct XorTally {
  std::uint64_t ops = 0;
};

/// Random 64-bit codes for every (type, binned frequency) and every
/// (attribute, bin) pair. Codes are pairwise distinct and non-zero.
class ZobristKeys {
 public:
  ZobristKeys() = default;
  ZobristKeys(std::size_t type_count, int frequency_bins, std::vector<int> attribute_bins,
              std::uint64_t seed);

  std::uint64_t frequency_code(TypeId type, int bin) const {
    return freq_codes_[type * static_cast<std::size_t>(frequency_bins_) + bin];
  }
  std::uint64_t attribute_code(std::size_t attr, int bin) const {
    return attr_codes_[attr_offsets_[attr] + bin];
  }

  /// XOR of the frequency codes of every type.
  std::uint64_t k1_init(std::span<const int> frequency_bins, XorTally* tally = nullptr) const;
  /// Replaces type `t`'s contribution: K1 ^ R[t][old] ^ R[t][new].
  std::uint64_t k1_update(std::uint64_t k1, TypeId t, int old_bin, int new_bin,
                          XorTally* tally = nullptr) const;
  /// K = K1 ^ K2, K2 being the XOR of the attribute codes.
  std::uint64_t key(std::uint64_t k1, std::span<const int> attribute_bins,
                    XorTally* tally = nullptr) const;
  /// Key recomputed from scratch.
  std::uint64_t key_of(const FeatureKey& features) const;

  std::size_t type_count() const { return type_count_; }
  int frequency_bins() const { return frequency_bins_; }
  const std::vector<int>& attribute_bins() const { return attribute_bins_; }
  std::uint64_t seed() const { return seed_; }
  bool operator==(const ZobristKeys&) const = default;

 private:
  std::size_t type_count_ = 0;
  int frequency_bins_ = 0;
  std::vector<int> attribute_bins_;
  std::vector<std::size_t> attr_offsets_;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> freq_codes_;
  std::vector<std::uint64_t> attr_codes_;
};

/// Keys for a stream schema and pane configuration.
ZobristKeys make_zobrist_keys(const StreamSchema& schema, const PaneConfig& pane, std::uint64_t seed);

/// K1 kept in step with a predecessor pane through incremental updates.
class PaneKey {
 public:
  PaneKey(const ZobristKeys& keys, const PaneConfig& pane);

  /// Applies raw frequency changes reported by PredecessorPane.
  void apply(std::span<const FreqChange> changes, XorTally* tally = nullptr);
  /// Recomputes K1 from raw pane frequencies.
  void reset(std::span<const int> frequencies);
  std::uint64_t k1() const { return k1_; }

 private:
  const ZobristKeys* keys_;
  PaneConfig pane_;
  std::uint64_t k1_;
};

}  // namespace shedcep
