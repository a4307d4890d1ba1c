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

#include "shedcep/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace shedcep {

bool PatternElement::accepts(TypeId t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

void Sequence::finalize(const std::string& pattern_id) {
  const std::string where = "pattern '" + pattern_id + "'";
  if (elements.empty()) throw ConfigError(where + ": empty sequence");
  if (!elements.front().positive())
    throw ConfigError(where + ": the first element must not be negated");
  if (!elements.back().positive())
    throw ConfigError(where + ": a negated element must be followed by a positive element");
  positives.clear();
  guards.clear();
  std::vector<int> pending;
  for (int i = 0; i < static_cast<int>(elements.size()); ++i) {
    const auto& el = elements[i];
    if (el.types.empty()) throw ConfigError(where + ": element '" + el.alias + "' has no types");
    if (el.kind == ElementKind::Any && el.k < 1)
      throw ConfigError(where + ": any() needs k >= 1");
    for (int ref : el.predicate.referenced_elements()) {
      if (ref > i)
        throw ConfigError(where + ": predicate on '" + el.alias +
                          "' refers to a later element '" + elements[ref].alias + "'");
      if (ref != i && !elements[ref].positive())
        throw ConfigError(where + ": predicate on '" + el.alias +
                          "' refers to negated element '" + elements[ref].alias + "'");
    }
    if (el.positive()) {
      positives.push_back(i);
      guards.push_back(std::move(pending));
      pending.clear();
    } else {
      pending.push_back(i);
    }
  }
}

void Pattern::validate() const {
  if (id.empty()) throw ConfigError("pattern without id");
  if (!(weight > 0.0) || !std::isfinite(weight))
    throw ConfigError("pattern '" + id + "': weight must be positive");
  if (!(window_size > 0.0)) throw ConfigError("pattern '" + id + "': window size must be positive");
  if (!(slide > 0.0)) throw ConfigError("pattern '" + id + "': slide must be positive");
  if (alternatives.empty()) throw ConfigError("pattern '" + id + "': no sequences");
}

Pattern build_pattern(const PatternSpec& spec, const StreamSchema& schema) {
  Pattern p;
  p.id = spec.id;
  p.weight = spec.weight;
  p.window_size = spec.window_size;
  p.slide = spec.slide;
  for (const auto& seq_spec : spec.alternatives) {
    Sequence seq;
    std::unordered_map<std::string, int> alias_index;
    for (const auto& es : seq_spec.elements) {
      PatternElement el;
      el.kind = es.kind;
      el.k = es.k;
      for (const auto& name : es.types) {
        auto t = schema.find_type(name);
        if (!t) throw ConfigError("pattern '" + spec.id + "': unknown event type '" + name + "'");
        el.types.push_back(*t);
      }
      el.alias = es.alias;
      if (el.alias.empty()) {
        if (es.kind == ElementKind::Any || es.types.size() != 1)
          throw ConfigError("pattern '" + spec.id + "': any() elements need an alias");
        el.alias = es.types.front();
      }
      if (!alias_index.emplace(el.alias, static_cast<int>(seq.elements.size())).second)
        throw ConfigError("pattern '" + spec.id + "': duplicate alias '" + el.alias + "'");
      seq.elements.push_back(std::move(el));
    }

    const RefResolver resolve = [&](std::string_view alias, std::string_view attr) {
      auto it = alias_index.find(std::string(alias));
      if (it == alias_index.end())
        throw ExprError("unknown alias '" + std::string(alias) + "'");
      auto a = schema.find_attribute(attr);
      if (!a) throw ExprError("unknown attribute '" + std::string(attr) + "'");
      return AttrRef{it->second, static_cast<int>(*a)};
    };

    try {
      for (std::size_t i = 0; i < seq.elements.size(); ++i)
        if (!seq_spec.elements[i].where.empty())
          seq.elements[i].predicate = Predicate::parse(seq_spec.elements[i].where, resolve);
      if (!seq_spec.where.empty()) {
        for (auto& conj : Predicate::parse(seq_spec.where, resolve).conjuncts()) {
          const auto refs = conj.referenced_elements();
          if (refs.empty()) throw ExprError("conjunct without attribute references");
          const int target = refs.back();
          seq.elements[target].predicate = Predicate::conjoin(seq.elements[target].predicate, conj);
        }
      }
    } catch (const ExprError& e) {
      throw ConfigError("pattern '" + spec.id + "': " + e.what());
    }
    seq.finalize(spec.id);
    p.alternatives.push_back(std::move(seq));
  }
  p.validate();
  return p;
}

namespace {

ElementSpec parse_element(ConfigObject obj) {
  ElementSpec es;
  if (obj.has("any")) {
    es.kind = ElementKind::Any;
    es.k = static_cast<int>(obj.integer("any"));
    es.types = obj.strings("types");
  } else {
    es.types = {obj.string("type")};
    const bool negated = obj.boolean_or("negated", false);
    const bool kleene = obj.boolean_or("kleene", false);
    if (negated && kleene) throw ConfigError(obj.path() + ": element cannot be both negated and kleene");
    es.kind = negated ? ElementKind::Negated : kleene ? ElementKind::Kleene : ElementKind::Atom;
  }
  es.alias = obj.string_or("alias", "");
  es.where = obj.string_or("where", "");
  obj.finish();
  return es;
}

}  // namespace

std::vector<PatternSpec> parse_pattern_specs(const Json& doc) {
  ConfigObject root(doc, "");
  const Json& list = root.raw("patterns");
  root.finish();
  if (!list.is_array() || list.empty()) throw ConfigError("patterns: expected a non-empty array");
  std::vector<PatternSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ConfigObject obj(list[i], "patterns[" + std::to_string(i) + "]");
    PatternSpec spec;
    spec.id = obj.string("id");
    spec.weight = obj.number_or("weight", 1.0);
    auto window = obj.object("window");
    spec.window_size = window.number("size");
    spec.slide = window.number("slide");
    window.finish();
    const Json& seqs = obj.raw("sequences");
    if (!seqs.is_array() || seqs.empty())
      throw ConfigError(obj.key_path("sequences") + ": expected a non-empty array");
    for (std::size_t s = 0; s < seqs.size(); ++s) {
      ConfigObject sobj(seqs[s], obj.key_path("sequences") + "[" + std::to_string(s) + "]");
      SequenceSpec ss;
      const Json& elems = sobj.raw("elements");
      if (!elems.is_array() || elems.empty())
        throw ConfigError(sobj.key_path("elements") + ": expected a non-empty array");
      for (std::size_t e = 0; e < elems.size(); ++e)
        ss.elements.push_back(parse_element(
            ConfigObject(elems[e], sobj.key_path("elements") + "[" + std::to_string(e) + "]")));
      ss.where = sobj.string_or("where", "");
      sobj.finish();
      spec.alternatives.push_back(std::move(ss));
    }
    obj.finish();
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<Pattern> load_patterns(const Json& doc, const StreamSchema& schema) {
  std::vector<Pattern> out;
  for (const auto& spec : parse_pattern_specs(doc)) {
    for (const auto& existing : out)
      if (existing.id == spec.id) throw ConfigError("duplicate pattern id '" + spec.id + "'");
    out.push_back(build_pattern(spec, schema));
  }
  return out;
}

}  // namespace shedcep
