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

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shedcep/event.hpp"

namespace shedcep {

class StreamParseError : public std::runtime_error {
 public:
  StreamParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads "ts,type,attr1,...,attrN" records. Blank lines and lines starting
/// with '#' are skipped but still counted for error line numbers.
class StreamReader {
 public:
  StreamReader(std::istream& in, const StreamSchema& schema);

  std::optional<Event> next();

 private:
  std::istream& in_;
  const StreamSchema& schema_;
  std::size_t line_no_ = 0;
  Seq next_seq_ = 0;
  double last_ts_ = 0.0;
};

std::vector<Event> read_stream(std::istream& in, const StreamSchema& schema);
std::vector<Event> read_stream(const std::filesystem::path& path, const StreamSchema& schema);

void write_stream(std::ostream& out, std::span<const Event> events, const StreamSchema& schema);
void write_stream(const std::filesystem::path& path, std::span<const Event> events,
                  const StreamSchema& schema);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace shedcep
