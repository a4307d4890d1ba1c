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

#include "shedcep/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace shedcep {

namespace {

enum class Tok { End, Number, Ident, Dot, LParen, RParen, Plus, Minus, Star, Slash,
                 Lt, Le, Eq, Ne, Ge, Gt, And, Or, Not };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    cur_ = Token{};
    cur_.pos = pos_;
    if (pos_ >= src_.size()) return;
    const char c = src_[pos_];
    auto two = [&](char next) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == next; };
    auto single = [&](Tok k, std::size_t len) {
      cur_.kind = k;
      cur_.text = src_.substr(pos_, len);
      pos_ += len;
    };
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
      if (ec != std::errc{}) throw ExprError("malformed number at offset " + std::to_string(pos_));
      const std::size_t len = static_cast<std::size_t>(ptr - (src_.data() + pos_));
      cur_.kind = Tok::Number;
      cur_.number = v;
      cur_.text = src_.substr(pos_, len);
      pos_ += len;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_ + 1;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      cur_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      if (cur_.text == "and") cur_.kind = Tok::And;
      else if (cur_.text == "or") cur_.kind = Tok::Or;
      else if (cur_.text == "not") cur_.kind = Tok::Not;
      else cur_.kind = Tok::Ident;
      return;
    }
    switch (c) {
      case '.': return single(Tok::Dot, 1);
      case '(': return single(Tok::LParen, 1);
      case ')': return single(Tok::RParen, 1);
      case '+': return single(Tok::Plus, 1);
      case '-': return single(Tok::Minus, 1);
      case '*': return single(Tok::Star, 1);
      case '/': return single(Tok::Slash, 1);
      case '<': return two('=') ? single(Tok::Le, 2) : single(Tok::Lt, 1);
      case '>': return two('=') ? single(Tok::Ge, 2) : single(Tok::Gt, 1);
      case '=': return two('=') ? single(Tok::Eq, 2) : single(Tok::Eq, 1);
      case '!': return two('=') ? single(Tok::Ne, 2) : single(Tok::Not, 1);
      case '&':
        if (two('&')) return single(Tok::And, 2);
        break;
      case '|':
        if (two('|')) return single(Tok::Or, 2);
        break;
      default:
        break;
    }
    throw ExprError(std::string("unexpected character '") + c + "' at offset " + std::to_string(pos_));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token cur_;
};

}  // namespace

class ExprParser {
 public:
  ExprParser(std::string_view src, const RefResolver& resolve, Predicate& out)
      : lex_(src), resolve_(resolve), out_(out) {}

  void run() {
    out_.root_ = parse_or();
    if (lex_.peek().kind != Tok::End)
      throw ExprError("unexpected '" + std::string(lex_.peek().text) + "' at offset " +
                      std::to_string(lex_.peek().pos));
    if (!Predicate::is_boolean(out_.nodes_[out_.root_].kind))
      throw ExprError("predicate must be a boolean expression");
  }

 private:
  using Kind = Predicate::Kind;

  int add(Kind k, int lhs = -1, int rhs = -1) {
    out_.nodes_.push_back({k, 0.0, {}, lhs, rhs});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }
  bool boolean(int idx) const { return Predicate::is_boolean(out_.nodes_[idx].kind); }
  void require_bool(int idx, const char* op) const {
    if (!boolean(idx)) throw ExprError(std::string("operand of '") + op + "' must be boolean");
  }
  void require_num(int idx, const char* op) const {
    if (boolean(idx)) throw ExprError(std::string("operand of '") + op + "' must be numeric");
  }
  void expect(Tok k, const char* what) {
    if (lex_.peek().kind != k)
      throw ExprError(std::string("expected ") + what + " at offset " + std::to_string(lex_.peek().pos));
    lex_.take();
  }

  int parse_or() {
    int lhs = parse_and();
    while (lex_.peek().kind == Tok::Or) {
      lex_.take();
      int rhs = parse_and();
      require_bool(lhs, "or");
      require_bool(rhs, "or");
      lhs = add(Kind::Or, lhs, rhs);
    }
    return lhs;
  }

  int parse_and() {
    int lhs = parse_not();
    while (lex_.peek().kind == Tok::And) {
      lex_.take();
      int rhs = parse_not();
      require_bool(lhs, "and");
      require_bool(rhs, "and");
      lhs = add(Kind::And, lhs, rhs);
    }
    return lhs;
  }

  int parse_not() {
    if (lex_.peek().kind == Tok::Not) {
      lex_.take();
      int operand = parse_not();
      require_bool(operand, "not");
      return add(Kind::Not, operand);
    }
    return parse_cmp();
  }

  int parse_cmp() {
    int lhs = parse_add();
    Kind k;
    switch (lex_.peek().kind) {
      case Tok::Lt: k = Kind::Lt; break;
      case Tok::Le: k = Kind::Le; break;
      case Tok::Eq: k = Kind::Eq; break;
      case Tok::Ne: k = Kind::Ne; break;
      case Tok::Ge: k = Kind::Ge; break;
      case Tok::Gt: k = Kind::Gt; break;
      default: return lhs;
    }
    lex_.take();
    int rhs = parse_add();
    require_num(lhs, "comparison");
    require_num(rhs, "comparison");
    return add(k, lhs, rhs);
  }

  int parse_add() {
    int lhs = parse_mul();
    while (lex_.peek().kind == Tok::Plus || lex_.peek().kind == Tok::Minus) {
      const Kind k = lex_.take().kind == Tok::Plus ? Kind::Add : Kind::Sub;
      int rhs = parse_mul();
      require_num(lhs, "+/-");
      require_num(rhs, "+/-");
      lhs = add(k, lhs, rhs);
    }
    return lhs;
  }

  int parse_mul() {
    int lhs = parse_unary();
    while (lex_.peek().kind == Tok::Star || lex_.peek().kind == Tok::Slash) {
      const Kind k = lex_.take().kind == Tok::Star ? Kind::Mul : Kind::Div;
      int rhs = parse_unary();
      require_num(lhs, "*//");
      require_num(rhs, "*//");
      lhs = add(k, lhs, rhs);
    }
    return lhs;
  }

  int parse_unary() {
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      int operand = parse_unary();
      require_num(operand, "-");
      return add(Kind::Neg, operand);
    }
    return parse_primary();
  }

  AttrRef parse_ref() {
    if (lex_.peek().kind != Tok::Ident)
      throw ExprError("expected alias.attribute at offset " + std::to_string(lex_.peek().pos));
    const auto alias = lex_.take().text;
    expect(Tok::Dot, "'.'");
    if (lex_.peek().kind != Tok::Ident)
      throw ExprError("expected attribute name after '" + std::string(alias) + ".'");
    const auto attr = lex_.take().text;
    return resolve_(alias, attr);
  }

  int parse_primary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Number: {
        int idx = add(Kind::Number);
        out_.nodes_[idx].number = lex_.take().number;
        return idx;
      }
      case Tok::LParen: {
        lex_.take();
        int inner = parse_or();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        if (t.text == "sum" || t.text == "abs") {
          const bool is_sum = t.text == "sum";
          lex_.take();
          expect(Tok::LParen, "'('");
          int idx;
          if (is_sum) {
            idx = add(Kind::Sum);
            out_.nodes_[idx].ref = parse_ref();
          } else {
            int operand = parse_add();
            require_num(operand, "abs");
            idx = add(Kind::Abs, operand);
          }
          expect(Tok::RParen, "')'");
          return idx;
        }
        const AttrRef ref = parse_ref();
        int idx = add(Kind::Value);
        out_.nodes_[idx].ref = ref;
        return idx;
      }
      default:
        throw ExprError("unexpected token at offset " + std::to_string(t.pos));
    }
  }

  Lexer lex_;
  const RefResolver& resolve_;
  Predicate& out_;
};

bool Predicate::is_boolean(Kind k) {
  switch (k) {
    case Kind::Lt: case Kind::Le: case Kind::Eq: case Kind::Ne: case Kind::Ge:
    case Kind::Gt: case Kind::And: case Kind::Or: case Kind::Not:
      return true;
    default:
      return false;
  }
}

Predicate Predicate::parse(std::string_view text, const RefResolver& resolve) {
  Predicate p;
  p.text_ = std::string(text);
  ExprParser(text, resolve, p).run();
  return p;
}

double Predicate::eval_node(int idx, const EvalContext& ctx) const {
  const Node& n = nodes_[idx];
  switch (n.kind) {
    case Kind::Number: return n.number;
    case Kind::Value: return ctx.value(n.ref);
    case Kind::Sum: return ctx.sum(n.ref);
    case Kind::Neg: return -eval_node(n.lhs, ctx);
    case Kind::Abs: return std::fabs(eval_node(n.lhs, ctx));
    case Kind::Add: return eval_node(n.lhs, ctx) + eval_node(n.rhs, ctx);
    case Kind::Sub: return eval_node(n.lhs, ctx) - eval_node(n.rhs, ctx);
    case Kind::Mul: return eval_node(n.lhs, ctx) * eval_node(n.rhs, ctx);
    case Kind::Div: return eval_node(n.lhs, ctx) / eval_node(n.rhs, ctx);
    case Kind::Lt: return eval_node(n.lhs, ctx) < eval_node(n.rhs, ctx);
    case Kind::Le: return eval_node(n.lhs, ctx) <= eval_node(n.rhs, ctx);
    case Kind::Eq: return eval_node(n.lhs, ctx) == eval_node(n.rhs, ctx);
    case Kind::Ne: return eval_node(n.lhs, ctx) != eval_node(n.rhs, ctx);
    case Kind::Ge: return eval_node(n.lhs, ctx) >= eval_node(n.rhs, ctx);
    case Kind::Gt: return eval_node(n.lhs, ctx) > eval_node(n.rhs, ctx);
    case Kind::And: return eval_node(n.lhs, ctx) != 0.0 && eval_node(n.rhs, ctx) != 0.0;
    case Kind::Or: return eval_node(n.lhs, ctx) != 0.0 || eval_node(n.rhs, ctx) != 0.0;
    case Kind::Not: return eval_node(n.lhs, ctx) == 0.0;
  }
  return 0.0;
}

bool Predicate::eval(const EvalContext& ctx) const {
  if (nodes_.empty()) return true;
  return eval_node(root_, ctx) != 0.0;
}

std::vector<int> Predicate::referenced_elements() const {
  std::vector<int> out;
  for (const auto& n : nodes_)
    if (n.kind == Kind::Value || n.kind == Kind::Sum) out.push_back(n.ref.element);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<AttrRef> Predicate::summed_refs() const {
  std::vector<AttrRef> out;
  for (const auto& n : nodes_)
    if (n.kind == Kind::Sum && std::find(out.begin(), out.end(), n.ref) == out.end())
      out.push_back(n.ref);
  std::sort(out.begin(), out.end(), [](AttrRef a, AttrRef b) {
    return a.element != b.element ? a.element < b.element : a.attribute < b.attribute;
  });
  return out;
}

int Predicate::copy_subtree(const Predicate& from, int idx) {
  Node n = from.nodes_[idx];
  if (n.lhs >= 0) n.lhs = copy_subtree(from, n.lhs);
  if (n.rhs >= 0) n.rhs = copy_subtree(from, n.rhs);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<Predicate> Predicate::conjuncts() const {
  std::vector<Predicate> out;
  if (nodes_.empty()) return out;
  std::vector<int> stack{root_};
  std::vector<int> leaves;
  while (!stack.empty()) {
    int idx = stack.back();
    stack.pop_back();
    if (nodes_[idx].kind == Kind::And) {
      stack.push_back(nodes_[idx].rhs);
      stack.push_back(nodes_[idx].lhs);
    } else {
      leaves.push_back(idx);
    }
  }
  for (int leaf : leaves) {
    Predicate p;
    p.root_ = p.copy_subtree(*this, leaf);
    p.text_ = text_;
    out.push_back(std::move(p));
  }
  return out;
}

Predicate Predicate::conjoin(const Predicate& a, const Predicate& b) {
  if (a.trivially_true()) return b;
  if (b.trivially_true()) return a;
  Predicate p;
  const int lhs = p.copy_subtree(a, a.root_);
  const int rhs = p.copy_subtree(b, b.root_);
  p.nodes_.push_back({Kind::And, 0.0, {}, lhs, rhs});
  p.root_ = static_cast<int>(p.nodes_.size()) - 1;
  p.text_ = "(" + a.text_ + ") and (" + b.text_ + ")";
  return p;
}

}  // namespace shedcep
