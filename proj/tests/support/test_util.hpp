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

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "shedcep/config.hpp"
#include "shedcep/engine.hpp"
#include "shedcep/event.hpp"
#include "shedcep/pattern.hpp"

namespace shedcep::testing {

inline std::vector<Pattern> patterns_from(const std::string& json_text, const StreamSchema& schema) {
  return load_patterns(Json::parse(json_text), schema);
}

inline StreamSchema letters_schema(int types, const std::string& attr = "V1", double max = 10.0) {
  std::vector<std::string> names;
  for (int i = 0; i < types; ++i) names.push_back(std::string(1, static_cast<char>('A' + i)));
  return StreamSchema(names, {AttributeDecl{attr, 1.0, max, 1.0}});
}

inline Event make_event(Seq seq, double ts, TypeId type, std::vector<double> attrs) {
  Event e;
  e.seq = seq;
  e.ts = ts;
  e.type = type;
  e.attrs = std::move(attrs);
  return e;
}

/// Short random stream with frequent timestamp ties and small integer
/// attributes, so predicates both pass and fail often.
inline std::vector<Event> random_stream(std::uint64_t seed, std::size_t max_len, int types, double max_gap) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<int> type(0, types - 1);
  std::uniform_int_distribution<int> value(1, 10);
  std::uniform_real_distribution<double> gap(0.0, max_gap);
  std::bernoulli_distribution tie(0.15);
  std::vector<Event> out;
  const std::size_t n = len(rng);
  double ts = static_cast<double>(std::uniform_int_distribution<int>(0, 20)(rng));
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !tie(rng)) ts += std::round(gap(rng) * 4.0) / 4.0;
    out.push_back(make_event(i, ts, static_cast<TypeId>(type(rng)), {static_cast<double>(value(rng))}));
  }
  return out;
}

}  // namespace shedcep::testing
