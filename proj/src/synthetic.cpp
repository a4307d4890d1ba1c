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

#include "shedcep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shedcep {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SyntheticSpec::validate() const {
  if (types.empty()) throw ConfigError("synthetic spec: no event types");
  if (types.size() != mean_interarrival.size())
    throw ConfigError("synthetic spec: 'types' and 'mu' must have the same length");
  for (std::size_t i = 0; i < mean_interarrival.size(); ++i)
    if (!(mean_interarrival[i] > 0.0) || !std::isfinite(mean_interarrival[i]))
      throw ConfigError("synthetic spec: mu for type '" + types[i] + "' must be positive");
  for (const auto& a : attributes)
    if (a.low > a.high)
      throw ConfigError("synthetic spec: attribute '" + a.name + "' has low > high");
  if (!count && !duration)
    throw ConfigError("synthetic spec: one of 'count' or 'duration' is required");
  if (duration && !(*duration >= 0.0))
    throw ConfigError("synthetic spec: duration must be non-negative");
}

StreamSchema SyntheticSpec::schema() const {
  std::vector<AttributeDecl> decls;
  for (const auto& a : attributes)
    decls.push_back({a.name, static_cast<double>(a.low), static_cast<double>(a.high), a.bin_size});
  return StreamSchema(types, std::move(decls));
}

SyntheticSpec dataset_preset(const std::string& name, std::uint64_t count,
                             std::uint64_t seed) {
  struct Row {
    const char* name;
    std::vector<double> mu;
  };
  static const Row rows[] = {
      {"DS1", {2.5, 15, 40}},
      {"DS2", {2.8, 15, 15}},
      {"DS3", {4, 6, 12}},
      {"DS4", {6, 6, 6}},
      {"DS5", {2.5, 15, 40, 2.5, 15, 40}},
      {"DS6", {2.8, 15, 15, 2.8, 15, 15}},
      {"DS7", {4, 6, 12, 4, 6, 12}},
      {"DS8", {6, 6, 6, 6, 6, 6}},
  };
  static const char* letters[] = {"A", "B", "C", "D", "E", "F"};
  for (const auto& row : rows) {
    if (name != row.name) continue;
    SyntheticSpec spec;
    for (std::size_t i = 0; i < row.mu.size(); ++i) spec.types.emplace_back(letters[i]);
    spec.mean_interarrival = row.mu;
    spec.count = count;
    spec.seed = seed;
    return spec;
  }
  throw ConfigError("unknown dataset preset '" + name + "'");
}

std::vector<double> expected_type_shares(const SyntheticSpec& spec) {
  double total = 0.0;
  for (double mu : spec.mean_interarrival) total += 1.0 / mu;
  std::vector<double> shares;
  for (double mu : spec.mean_interarrival) shares.push_back((1.0 / mu) / total);
  return shares;
}

SyntheticGenerator::SyntheticGenerator(SyntheticSpec spec)
    : spec_(std::move(spec)), attr_rng_(mix_seed(spec_.seed, 0xA77)) {
  spec_.validate();
  schema_ = spec_.schema();
  const std::size_t n = spec_.types.size();
  for (std::size_t t = 0; t < n; ++t) {
    type_rngs_.emplace_back(mix_seed(spec_.seed, t));
    gaps_.emplace_back(1.0 / spec_.mean_interarrival[t]);
    next_arrival_.push_back(gaps_[t](type_rngs_[t]));
  }
}

std::optional<Event> SyntheticGenerator::next() {
  if (spec_.count && emitted_ >= *spec_.count) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t t = 1; t < next_arrival_.size(); ++t)
    if (next_arrival_[t] < next_arrival_[best]) best = t;
  const double ts = next_arrival_[best];
  if (spec_.duration && ts > *spec_.duration) return std::nullopt;

  Event e;
  e.seq = emitted_++;
  e.ts = ts;
  e.type = static_cast<TypeId>(best);
  e.attrs.reserve(spec_.attributes.size());
  for (const auto& a : spec_.attributes) {
    std::uniform_int_distribution<int> dist(a.low, a.high);
    e.attrs.push_back(static_cast<double>(dist(attr_rng_)));
  }
  next_arrival_[best] += gaps_[best](type_rngs_[best]);
  return e;
}

std::vector<Event> generate_synthetic(const SyntheticSpec& spec) {
  SyntheticGenerator gen(spec);
  std::vector<Event> out;
  if (spec.count) out.reserve(static_cast<std::size_t>(*spec.count));
  while (auto e = gen.next()) out.push_back(std::move(*e));
  return out;
}

}  // namespace shedcep
