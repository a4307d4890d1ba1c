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

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace shedcep {

class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A resolved `alias.attribute` reference.
struct AttrRef {
  int element = -1;
  int attribute = -1;
  bool operator==(const AttrRef&) const = default;
};

/// Supplies attribute values during predicate evaluation.
///
/// `value` returns the attribute of the event bound to `element` (the
/// candidate if `element` is the one being tested, otherwise its most
/// recent binding). `sum` folds over the events already bound to
/// `element`, excluding the candidate.
class EvalContext {
 public:
  virtual ~EvalContext() = default;
  virtual double value(AttrRef ref) const = 0;
  virtual double sum(AttrRef ref) const = 0;
};

using RefResolver = std::function<AttrRef(std::string_view alias, std::string_view attribute)>;

/// Boolean predicate over bound event attributes. Supports numeric
/// literals, `alias.attr`, `sum(alias.attr)`, `abs(x)`, + - * /, the
/// comparisons < <= = == != >= >, and `and`/`or`/`not` with parentheses.
class Predicate {
 public:
  Predicate() = default;  // always true

  static Predicate parse(std::string_view text, const RefResolver& resolve);

  bool eval(const EvalContext& ctx) const;
  bool trivially_true() const { return nodes_.empty(); }

  /// Elements referenced anywhere in the predicate (sorted, unique).
  std::vector<int> referenced_elements() const;
  /// Elements referenced through sum(...) (sorted, unique).
  std::vector<AttrRef> summed_refs() const;

  /// Splits a top-level conjunction into its operands.
  std::vector<Predicate> conjuncts() const;
  /// Conjunction of two predicates.
  static Predicate conjoin(const Predicate& a, const Predicate& b);

  const std::string& text() const { return text_; }

 private:
  enum class Kind : unsigned char {
    Number, Value, Sum, Neg, Abs, Add, Sub, Mul, Div,
    Lt, Le, Eq, Ne, Ge, Gt, And, Or, Not
  };
  struct Node {
    Kind kind;
    double number = 0.0;
    AttrRef ref;
    int lhs = -1;
    int rhs = -1;
  };
  friend class ExprParser;

  double eval_node(int idx, const EvalContext& ctx) const;
  int copy_subtree(const Predicate& from, int idx);
  static bool is_boolean(Kind k);

  std::vector<Node> nodes_;
  int root_ = -1;
  std::string text_;
};

}  // namespace shedcep
