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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace shedcep {

using TypeId = std::uint32_t;
using Seq = std::uint64_t;

/// Raised when a schema, spec or config is internally inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EventType {
  TypeId id = 0;
  std::string name;
};

/// Numeric attribute declaration. Values are clamped into [min, max] and
/// grouped into bins of `bin_size`.
struct AttributeDecl {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  double bin_size = 1.0;

  /// Number of distinct bin indices, i.e. bin_value(max) + 1.
  int bin_count() const;
};

int bin_value(double x, const AttributeDecl& decl);

struct Event {
  Seq seq = 0;
  double ts = 0.0;
  TypeId type = 0;
  std::vector<double> attrs;

  bool operator==(const Event&) const = default;
};

class StreamSchema {
 public:
  StreamSchema() = default;
  StreamSchema(std::vector<std::string> type_names,
               std::vector<AttributeDecl> attributes);

  std::size_t type_count() const { return types_.size(); }
  std::size_t attribute_count() const { return attributes_.size(); }
  const std::vector<EventType>& types() const { return types_; }
  const std::vector<AttributeDecl>& attributes() const { return attributes_; }
  const EventType& type(TypeId id) const { return types_.at(id); }
  const AttributeDecl& attribute(std::size_t i) const { return attributes_.at(i); }

  std::optional<TypeId> find_type(std::string_view name) const;
  std::optional<std::size_t> find_attribute(std::string_view name) const;

  /// Bins every attribute of `e` into `out` (resized to attribute_count()).
  void bin_attributes(const Event& e, std::vector<int>& out) const;

  bool operator==(const StreamSchema& other) const;

 private:
  std::vector<EventType> types_;
  std::vector<AttributeDecl> attributes_;
};

}  // namespace shedcep
