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

#include "shedcep/event.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace shedcep {

int AttributeDecl::bin_count() const { return bin_value(max, *this) + 1; }

int bin_value(double x, const AttributeDecl& decl) {
  const double clamped = std::clamp(x, decl.min, decl.max);
  return static_cast<int>(std::floor((clamped - decl.min) / decl.bin_size));
}

StreamSchema::StreamSchema(std::vector<std::string> type_names,
                           std::vector<AttributeDecl> attributes)
    : attributes_(std::move(attributes)) {
  if (type_names.empty()) throw ConfigError("schema declares no event types");
  std::unordered_set<std::string> seen;
  types_.reserve(type_names.size());
  for (auto& name : type_names) {
    if (name.empty()) throw ConfigError("empty event type name");
    if (!seen.insert(name).second)
      throw ConfigError("duplicate event type name '" + name + "'");
    types_.push_back({static_cast<TypeId>(types_.size()), std::move(name)});
  }
  seen.clear();
  for (const auto& a : attributes_) {
    if (!seen.insert(a.name).second)
      throw ConfigError("duplicate attribute name '" + a.name + "'");
    if (!(a.min <= a.max))
      throw ConfigError("attribute '" + a.name + "': min must not exceed max");
    if (!(a.bin_size > 0.0))
      throw ConfigError("attribute '" + a.name + "': bin_size must be positive");
  }
}

std::optional<TypeId> StreamSchema::find_type(std::string_view name) const {
  for (const auto& t : types_)
    if (t.name == name) return t.id;
  return std::nullopt;
}

std::optional<std::size_t> StreamSchema::find_attribute(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i)
    if (attributes_[i].name == name) return i;
  return std::nullopt;
}

void StreamSchema::bin_attributes(const Event& e, std::vector<int>& out) const {
  out.resize(attributes_.size());
  for (std::size_t i = 0; i < attributes_.size(); ++i)
    out[i] = bin_value(e.attrs[i], attributes_[i]);
}

bool StreamSchema::operator==(const StreamSchema& other) const {
  if (types_.size() != other.types_.size() ||
      attributes_.size() != other.attributes_.size())
    return false;
  for (std::size_t i = 0; i < types_.size(); ++i)
    if (types_[i].name != other.types_[i].name) return false;
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    const auto& a = attributes_[i];
    const auto& b = other.attributes_[i];
    if (a.name != b.name || a.min != b.min || a.max != b.max || a.bin_size != b.bin_size)
      return false;
  }
  return true;
}

}  // namespace shedcep
