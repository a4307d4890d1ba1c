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
#include <iosfwd>
#include <span>
#include <string>

#include "shedcep/config.hpp"
#include "shedcep/shedder.hpp"

namespace shedcep {

inline constexpr const char* kModelFormat = "shedcep-model";
inline constexpr int kModelVersion = 1;

OrderedJson schema_to_json(const StreamSchema& schema);
StreamSchema schema_from_json(ConfigObject node);
OrderedJson pane_to_json(const PaneConfig& pane);
PaneConfig pane_from_json(ConfigObject node);

/// Versioned JSON model file holding the trained backend and its context.
/// Trees are stored as preorder node lists.
OrderedJson model_to_json(const ShedderModel& model);
ShedderModel model_from_json(const Json& doc);
void save_model(const ShedderModel& model, const std::filesystem::path& path);
ShedderModel load_model(const std::filesystem::path& path);

/// Human-readable summary: table sizes, tree depths, histogram span.
std::string describe_model(const ShedderModel& model);

/// CSV dump of aggregated observations: type, F..., attrs..., M, O, U.
void write_groups_csv(std::span<const AggregatedObservation> groups, const StreamSchema& schema,
                      std::ostream& out);

}  // namespace shedcep
