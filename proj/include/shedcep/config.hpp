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

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shedcep/event.hpp"

namespace shedcep {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Strict reader over one JSON object: every key must be consumed, and
/// `finish()` rejects whatever is left. Errors name the full key path.
class ConfigObject {
 public:
  ConfigObject(const Json& node, std::string path);

  bool has(const std::string& key) const;
  const Json& raw(const std::string& key);
  ConfigObject object(const std::string& key);
  std::optional<ConfigObject> optional_object(const std::string& key);

  std::string string(const std::string& key);
  std::string string_or(const std::string& key, const std::string& fallback);
  double number(const std::string& key);
  double number_or(const std::string& key, double fallback);
  std::int64_t integer(const std::string& key);
  std::int64_t integer_or(const std::string& key, std::int64_t fallback);
  bool boolean_or(const std::string& key, bool fallback);
  std::vector<std::string> strings(const std::string& key);
  std::vector<double> numbers(const std::string& key);

  std::string key_path(const std::string& key) const;
  const std::string& path() const { return path_; }
  void finish() const;

 private:
  const Json& at(const std::string& key);

  const Json& node_;
  std::string path_;
  std::set<std::string> used_;
};

Json load_json_file(const std::filesystem::path& path);

/// Applies "a.b.c=value" overrides; `value` is parsed as JSON when possible,
/// otherwise taken as a string.
void apply_override(Json& config, const std::string& assignment);

}  // namespace shedcep
