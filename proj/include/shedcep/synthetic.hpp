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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shedcep/event.hpp"

namespace shedcep {

/// Uniformly distributed integer attribute, shared by all event types.
struct UniformIntAttribute {
  std::string name = "V1";
  int low = 1;
  int high = 10;
  double bin_size = 1.0;
};

struct SyntheticSpec {
  std::vector<std::string> types;
  /// Mean inter-arrival time per type, in stream seconds.
  std::vector<double> mean_interarrival;
  std::vector<UniformIntAttribute> attributes{UniformIntAttribute{}};
  std::optional<std::uint64_t> count;
  std::optional<double> duration;
  std::uint64_t seed = 1;

  void validate() const;
  StreamSchema schema() const;
};

/// Named presets for the eight synthetic datasets (DS1..DS8), attribute
/// V1 uniform in 1..10.
SyntheticSpec dataset_preset(const std::string& name, std::uint64_t count,
                             std::uint64_t seed);

/// Expected long-run share of each type: (1/mu_X) / sum_Y (1/mu_Y).
std::vector<double> expected_type_shares(const SyntheticSpec& spec);

/// Pull-style generator: each type produces an independent Poisson process;
/// the per-type substreams are merged by timestamp, ties going to the lower
/// type id.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(SyntheticSpec spec);

  std::optional<Event> next();
  const StreamSchema& schema() const { return schema_; }

 private:
  SyntheticSpec spec_;
  StreamSchema schema_;
  std::vector<std::mt19937_64> type_rngs_;
  std::vector<std::exponential_distribution<double>> gaps_;
  std::vector<double> next_arrival_;
  std::mt19937_64 attr_rng_;
  Seq emitted_ = 0;
};

std::vector<Event> generate_synthetic(const SyntheticSpec& spec);

/// SplitMix64 finalizer; used to derive independent seeds from one root seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace shedcep
