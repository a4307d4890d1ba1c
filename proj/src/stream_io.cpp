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

#include "shedcep/stream_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

namespace shedcep {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

StreamParseError::StreamParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

StreamReader::StreamReader(std::istream& in, const StreamSchema& schema)
    : in_(in), schema_(schema) {}

std::optional<Event> StreamReader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_no_;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::size_t arity = schema_.attribute_count();
    if (fields.size() != arity + 2)
      throw StreamParseError(line_no_, "expected " + std::to_string(arity + 2) +
                                           " fields, found " + std::to_string(fields.size()));
    auto ts = parse_number(fields[0]);
    if (!ts) throw StreamParseError(line_no_, "invalid timestamp '" + std::string(fields[0]) + "'");
    auto type = schema_.find_type(fields[1]);
    if (!type) throw StreamParseError(line_no_, "unknown event type '" + std::string(fields[1]) + "'");
    if (next_seq_ > 0 && *ts < last_ts_)
      throw StreamParseError(line_no_, "timestamp decreases");

    Event e;
    e.seq = next_seq_++;
    e.ts = *ts;
    e.type = *type;
    e.attrs.reserve(arity);
    for (std::size_t i = 0; i < arity; ++i) {
      auto v = parse_number(fields[i + 2]);
      if (!v)
        throw StreamParseError(line_no_, "invalid value for attribute '" +
                                             schema_.attribute(i).name + "'");
      e.attrs.push_back(*v);
    }
    last_ts_ = e.ts;
    return e;
  }
  return std::nullopt;
}

std::vector<Event> read_stream(std::istream& in, const StreamSchema& schema) {
  StreamReader reader(in, schema);
  std::vector<Event> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

std::vector<Event> read_stream(const std::filesystem::path& path, const StreamSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file '" + path.string() + "'");
  return read_stream(in, schema);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_stream(std::ostream& out, std::span<const Event> events, const StreamSchema& schema) {
  for (const auto& e : events) {
    out << format_double(e.ts) << ',' << schema.type(e.type).name;
    for (double a : e.attrs) out << ',' << format_double(a);
    out << '\n';
  }
}

void write_stream(const std::filesystem::path& path, std::span<const Event> events,
                  const StreamSchema& schema) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write stream file '" + path.string() + "'");
  write_stream(out, events, schema);
}

}  // namespace shedcep
