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

#include <string>
#include <vector>

#include "shedcep/config.hpp"
#include "shedcep/event.hpp"
#include "shedcep/expr.hpp"

namespace shedcep {

enum class ElementKind { Atom, Negated, Kleene, Any };

struct PatternElement {
  ElementKind kind = ElementKind::Atom;
  std::vector<TypeId> types;
  /// Number of events an Any element binds.
  int k = 1;
  std::string alias;
  /// Checked whenever a candidate event is about to bind to this element.
  Predicate predicate;

  bool accepts(TypeId t) const;
  bool positive() const { return kind != ElementKind::Negated; }
  /// Bindings needed before the element is satisfied (Kleene: at least one).
  int required() const { return kind == ElementKind::Any ? k : 1; }
};

/// One alternative of a pattern: a sequence of elements with derived
/// bookkeeping for the matcher.
struct Sequence {
  std::vector<PatternElement> elements;
  /// Indices (into `elements`) of the non-negated elements, in order.
  std::vector<int> positives;
  /// guards[p]: negated elements strictly between positives[p-1] and
  /// positives[p]; guards[0] is always empty.
  std::vector<std::vector<int>> guards;

  /// Fills `positives` and `guards` and validates the structural
  /// invariants (non-empty, first and last element positive, k >= 1,
  /// predicates only look backwards).
  void finalize(const std::string& pattern_id);
};

struct Pattern {
  std::string id;
  double weight = 1.0;
  double window_size = 0.0;
  double slide = 0.0;
  std::vector<Sequence> alternatives;

  void validate() const;
};

/// Element description used by the builder API and the query loader.
struct ElementSpec {
  ElementKind kind = ElementKind::Atom;
  std::vector<std::string> types;
  int k = 1;
  std::string alias;
  std::string where;
};

struct SequenceSpec {
  std::vector<ElementSpec> elements;
  /// Extra conjunction; each top-level conjunct is attached to the latest
  /// element it references.
  std::string where;
};

struct PatternSpec {
  std::string id;
  double weight = 1.0;
  double window_size = 0.0;
  double slide = 0.0;
  std::vector<SequenceSpec> alternatives;
};

Pattern build_pattern(const PatternSpec& spec, const StreamSchema& schema);

/// Parses a query file of the form {"patterns": [ ... ]}.
std::vector<Pattern> load_patterns(const Json& doc, const StreamSchema& schema);
std::vector<PatternSpec> parse_pattern_specs(const Json& doc);

}  // namespace shedcep
