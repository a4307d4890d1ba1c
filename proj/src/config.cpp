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

#include "shedcep/config.hpp"

#include <cmath>
#include <fstream>

namespace shedcep {

ConfigObject::ConfigObject(const Json& node, std::string path)
    : node_(node), path_(std::move(path)) {
  if (!node_.is_object())
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": expected an object");
}

std::string ConfigObject::key_path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

bool ConfigObject::has(const std::string& key) const { return node_.contains(key); }

const Json& ConfigObject::at(const std::string& key) {
  auto it = node_.find(key);
  if (it == node_.end()) throw ConfigError(key_path(key) + ": missing required key");
  used_.insert(key);
  return *it;
}

const Json& ConfigObject::raw(const std::string& key) { return at(key); }

ConfigObject ConfigObject::object(const std::string& key) {
  return ConfigObject(at(key), key_path(key));
}

std::optional<ConfigObject> ConfigObject::optional_object(const std::string& key) {
  if (!has(key)) return std::nullopt;
  return object(key);
}

std::string ConfigObject::string(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_string()) throw ConfigError(key_path(key) + ": expected a string");
  return v.get<std::string>();
}

std::string ConfigObject::string_or(const std::string& key, const std::string& fallback) {
  return has(key) ? string(key) : fallback;
}

double ConfigObject::number(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_number()) throw ConfigError(key_path(key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key_path(key) + ": expected a finite number");
  return d;
}

double ConfigObject::number_or(const std::string& key, double fallback) {
  return has(key) ? number(key) : fallback;
}

std::int64_t ConfigObject::integer(const std::string& key) {
  const Json& v = at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  throw ConfigError(key_path(key) + ": expected an integer");
}

std::int64_t ConfigObject::integer_or(const std::string& key, std::int64_t fallback) {
  return has(key) ? integer(key) : fallback;
}

bool ConfigObject::boolean_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) throw ConfigError(key_path(key) + ": expected true or false");
  return v.get<bool>();
}

std::vector<std::string> ConfigObject::strings(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_array()) throw ConfigError(key_path(key) + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(key_path(key) + ": expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<double> ConfigObject::numbers(const std::string& key) {
  const Json& v = at(key);
  if (!v.is_array()) throw ConfigError(key_path(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : v) {
    if (!item.is_number()) throw ConfigError(key_path(key) + ": expected an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

void ConfigObject::finish() const {
  for (auto it = node_.begin(); it != node_.end(); ++it)
    if (!used_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + key + "': parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

}  // namespace shedcep
