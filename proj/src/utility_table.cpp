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

#include <map>

#include "shedcep/utility_model.hpp"

namespace shedcep {

DefaultUtility parse_default_utility(const std::string& name) {
  if (name == "mean") return DefaultUtility::Mean;
  if (name == "zero") return DefaultUtility::Zero;
  if (name == "one") return DefaultUtility::One;
  throw ConfigError("default_utility must be one of mean, zero, one (got '" + name + "')");
}

std::string to_string(DefaultUtility d) {
  switch (d) {
    case DefaultUtility::Mean: return "mean";
    case DefaultUtility::Zero: return "zero";
    case DefaultUtility::One: return "one";
  }
  return "mean";
}

UtilityTable UtilityTable::build(std::span<const AggregatedObservation> groups, ZobristKeys keys,
                                 DefaultUtility default_policy, bool track_collisions) {
  UtilityTable t;
  t.keys_ = std::move(keys);
  t.policy_ = default_policy;
  const std::size_t types = t.keys_.type_count();
  t.tables_.resize(types);
  std::vector<double> mass(types, 0.0);
  std::vector<double> count(types, 0.0);
  std::map<std::pair<TypeId, std::uint64_t>, const FeatureKey*> owners;
  for (const auto& g : groups) {
    if (g.key.type >= types) throw ConfigError("utility table: group type out of range");
    if (g.O == 0) throw ConfigError("utility table: group with O = 0");
    const std::uint64_t k = t.keys_.key_of(g.key);
    if (track_collisions) {
      auto [it, inserted] = owners.emplace(std::make_pair(g.key.type, k), &g.key);
      if (!inserted && *it->second != g.key) ++t.collisions_;
    }
    t.tables_[g.key.type][k] = g.M / static_cast<double>(g.O);
    mass[g.key.type] += g.M;
    count[g.key.type] += static_cast<double>(g.O);
  }
  double all_mass = 0.0, all_count = 0.0;
  for (std::size_t i = 0; i < types; ++i) {
    all_mass += mass[i];
    all_count += count[i];
  }
  const double global_mean = all_count > 0.0 ? all_mass / all_count : 0.0;
  t.defaults_.resize(types);
  for (std::size_t i = 0; i < types; ++i) {
    switch (default_policy) {
      case DefaultUtility::Mean:
        t.defaults_[i] = count[i] > 0.0 ? mass[i] / count[i] : global_mean;
        break;
      case DefaultUtility::Zero: t.defaults_[i] = 0.0; break;
      case DefaultUtility::One: t.defaults_[i] = 1.0; break;
    }
  }
  return t;
}

double UtilityTable::predict(const FeatureKey& features) const {
  return lookup(features.type, keys_.key_of(features));
}

std::size_t UtilityTable::size() const {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.size();
  return n;
}

UtilityTable UtilityTable::from_parts(ZobristKeys keys, DefaultUtility policy,
                                      std::vector<std::unordered_map<std::uint64_t, double>> tables,
                                      std::vector<double> defaults) {
  if (tables.size() != keys.type_count() || defaults.size() != keys.type_count())
    throw ConfigError("utility table: per-type tables do not match the key set");
  UtilityTable t;
  t.keys_ = std::move(keys);
  t.policy_ = policy;
  t.tables_ = std::move(tables);
  t.defaults_ = std::move(defaults);
  return t;
}

bool UtilityTable::operator==(const UtilityTable& other) const {
  return keys_ == other.keys_ && policy_ == other.policy_ && tables_ == other.tables_ &&
         defaults_ == other.defaults_;
}

double weighted_training_mse(const UtilityModel& model, std::span<const AggregatedObservation> groups) {
  double err = 0.0, weight = 0.0;
  for (const auto& g : groups) {
    const double u = g.M / static_cast<double>(g.O);
    const double d = model.predict(g.key) - u;
    err += static_cast<double>(g.O) * d * d;
    weight += static_cast<double>(g.O);
  }
  return weight > 0.0 ? err / weight : 0.0;
}

}  // namespace shedcep
