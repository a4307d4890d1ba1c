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

#include "shedcep/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace shedcep {

WindowClock::WindowClock(double size, double slide) : size_(size), slide_(slide) {
  if (!(size > 0.0) || !(slide > 0.0)) throw ConfigError("window size and slide must be positive");
}

WindowClock::Advance WindowClock::advance(double ts) {
  Advance adv;
  while (!open_.empty() && end(open_.front()) <= ts) {
    adv.closed.push_back(open_.front());
    open_.pop_front();
  }
  const auto boundary = static_cast<WindowId>(std::floor(ts / slide_));
  WindowId k = last_opened_ ? *last_opened_ + 1 : boundary;
  // Skip boundaries whose window is already over.
  while (k <= boundary && end(k) <= ts) ++k;
  for (; k <= boundary; ++k) {
    open_.push_back(k);
    adv.opened.push_back(k);
  }
  if (!last_opened_ || boundary > *last_opened_) last_opened_ = boundary;
  return adv;
}

std::vector<WindowId> WindowClock::close_all() {
  std::vector<WindowId> closed(open_.begin(), open_.end());
  open_.clear();
  return closed;
}

const std::vector<Credit>* ContributionLedger::find(Seq seq) const {
  auto it = credits_.find(seq);
  return it == credits_.end() ? nullptr : &it->second;
}

double ContributionLedger::total_weight(Seq seq) const {
  double total = 0.0;
  if (auto* c = find(seq))
    for (const auto& credit : *c) total += credit.weight;
  return total;
}

namespace {

struct Binding {
  int element;
  const Event* event;
};

struct PartialMatch {
  std::uint64_t id = 0;
  std::uint32_t alt = 0;
  std::uint32_t pos = 0;    // index into Sequence::positives
  std::uint32_t count = 0;  // bindings made to the current positive element
  bool alive = true;
  std::vector<Binding> bound;
  std::vector<int> last_bound;  // per element: index into `bound`, -1 if none
  std::vector<double> sums;     // per summed (element, attribute) slot
};

struct SumSlots {
  // slot_of[element][attribute] -> slot or -1
  std::vector<std::vector<int>> slot_of;
  std::size_t count = 0;
};

class MatchContext final : public EvalContext {
 public:
  MatchContext(const PartialMatch* pm, const SumSlots& slots, const Event& candidate, int element)
      : pm_(pm), slots_(slots), candidate_(candidate), element_(element) {}

  double value(AttrRef ref) const override {
    if (ref.element == element_) return candidate_.attrs[ref.attribute];
    const int idx = pm_->last_bound[ref.element];
    return pm_->bound[idx].event->attrs[ref.attribute];
  }
  double sum(AttrRef ref) const override {
    if (pm_ == nullptr) return 0.0;
    return pm_->sums[slots_.slot_of[ref.element][ref.attribute]];
  }

 private:
  const PartialMatch* pm_;
  const SumSlots& slots_;
  const Event& candidate_;
  int element_;
};

}  // namespace

struct Engine::PatternRuntime {
  struct WindowState {
    WindowId id;
    std::vector<PartialMatch> pms;
  };

  explicit PatternRuntime(const Pattern& p) : clock(p.window_size, p.slide) {
    for (const auto& seq : p.alternatives) {
      SumSlots s;
      s.slot_of.assign(seq.elements.size(), {});
      for (const auto& el : seq.elements) {
        for (AttrRef ref : el.predicate.summed_refs()) {
          auto& row = s.slot_of[ref.element];
          if (row.size() <= static_cast<std::size_t>(ref.attribute)) row.resize(ref.attribute + 1, -1);
          if (row[ref.attribute] < 0) row[ref.attribute] = static_cast<int>(s.count++);
        }
      }
      slots.push_back(std::move(s));
    }
  }

  WindowClock clock;
  std::vector<SumSlots> slots;  // per alternative
  std::deque<WindowState> windows;
};

Engine::Engine(std::vector<Pattern> patterns, EngineOptions options)
    : patterns_(std::move(patterns)), options_(options) {
  if (patterns_.empty()) throw ConfigError("engine needs at least one pattern");
  for (const auto& p : patterns_) {
    p.validate();
    runtime_.emplace_back(p);
    max_window_ = std::max(max_window_, p.window_size);
  }
}

Engine::~Engine() = default;
Engine::Engine(Engine&&) noexcept = default;
Engine& Engine::operator=(Engine&&) noexcept = default;

std::vector<WindowId> Engine::open_windows(std::size_t pattern) const {
  const auto& open = runtime_.at(pattern).clock.open();
  return {open.begin(), open.end()};
}

std::size_t Engine::live_partial_matches() const {
  std::size_t n = 0;
  for (const auto& rt : runtime_)
    for (const auto& w : rt.windows)
      for (const auto& pm : w.pms) n += pm.alive ? 1 : 0;
  return n;
}

void Engine::close_window(std::uint32_t p, WindowId w, StepResult& out) {
  auto& windows = runtime_[p].windows;
  auto it = std::find_if(windows.begin(), windows.end(), [&](const auto& ws) { return ws.id == w; });
  if (it == windows.end()) return;
  if (options_.record_notifications)
    for (const auto& pm : it->pms)
      if (pm.alive)
        out.notifications.push_back({NotificationKind::Abandon, AbandonReason::WindowClose, p, w, pm.id, std::nullopt});
  windows.erase(it);
}

void Engine::process(const Event& e, StepResult& out) {
  if (seen_event_ && e.ts < last_ts_) throw ConfigError("engine: event timestamps must be non-decreasing");
  seen_event_ = true;
  last_ts_ = e.ts;

  history_.push_back(e);
  const Event& ev = history_.back();
  while (!history_.empty() && history_.front().ts < ev.ts - max_window_) history_.pop_front();

  const bool notify = options_.record_notifications;
  for (std::uint32_t p = 0; p < patterns_.size(); ++p) {
    const Pattern& pattern = patterns_[p];
    auto& rt = runtime_[p];
    auto adv = rt.clock.advance(ev.ts);
    for (WindowId w : adv.closed) close_window(p, w, out);
    for (WindowId w : adv.opened) rt.windows.push_back({w, {}});

    for (auto& ws : rt.windows) {
      auto& pms = ws.pms;
      bool negation_fired = false;

      // Negated guards: abandon partial matches whose pending negation matches.
      for (auto& pm : pms) {
        if (!pm.alive) continue;
        const Sequence& seq = pattern.alternatives[pm.alt];
        const PatternElement& cur = seq.elements[seq.positives[pm.pos]];
        const std::size_t pending =
            (cur.kind == ElementKind::Kleene && pm.count >= 1) ? pm.pos + 1 : pm.pos;
        if (pending >= seq.guards.size()) continue;
        bool hit = false;
        for (int g : seq.guards[pending]) {
          const auto& neg = seq.elements[g];
          if (!neg.accepts(ev.type)) continue;
          MatchContext ctx(&pm, rt.slots[pm.alt], ev, g);
          if (neg.predicate.eval(ctx)) {
            hit = true;
            break;
          }
        }
        if (!hit) continue;
        pm.alive = false;
        negation_fired = true;
        if (notify)
          out.notifications.push_back({NotificationKind::Abandon, AbandonReason::Negation, p, ws.id, pm.id, ev.seq});
        if (!options_.negation_kills_all) break;
      }
      if (negation_fired && options_.track_contributions)
        ledger_.credit(ev.seq, {CreditKind::Abandon, p, ws.id, pattern.weight});

      auto bind = [&](PartialMatch& pm, int element) {
        const auto& slot_row = rt.slots[pm.alt].slot_of[element];
        for (std::size_t a = 0; a < slot_row.size(); ++a)
          if (slot_row[a] >= 0) pm.sums[slot_row[a]] += ev.attrs[a];
        pm.last_bound[element] = static_cast<int>(pm.bound.size());
        pm.bound.push_back({element, &ev});
      };

      // Returns true when `pm` reached the end of its sequence.
      auto advance_after_bind = [&](PartialMatch& pm) {
        const Sequence& seq = pattern.alternatives[pm.alt];
        const PatternElement& el = seq.elements[seq.positives[pm.pos]];
        ++pm.count;
        if (el.kind == ElementKind::Kleene) return pm.pos + 1 == seq.positives.size();
        if (static_cast<int>(pm.count) < el.required()) return false;
        ++pm.pos;
        pm.count = 0;
        return pm.pos == seq.positives.size();
      };

      auto complete = [&](PartialMatch& pm) {
        pm.alive = false;
        ComplexEvent ce;
        ce.pattern = p;
        ce.window = ws.id;
        ce.weight = pattern.weight;
        ce.events.reserve(pm.bound.size());
        for (const auto& b : pm.bound) ce.events.push_back(b.event->seq);
        if (notify)
          out.notifications.push_back({NotificationKind::Complete, AbandonReason::None, p, ws.id, pm.id, ev.seq});
        if (options_.track_contributions)
          for (Seq s : ce.events) ledger_.credit(s, {CreditKind::Complex, p, ws.id, pattern.weight});
        // The first bound event is consumed in this window.
        const Seq consumed = ce.events.front();
        for (auto& other : pms) {
          if (!other.alive) continue;
          const bool holds = std::any_of(other.bound.begin(), other.bound.end(),
                                         [&](const Binding& b) { return b.event->seq == consumed; });
          if (!holds) continue;
          other.alive = false;
          if (notify)
            out.notifications.push_back({NotificationKind::Abandon, AbandonReason::Consumed, p, ws.id, other.id, ev.seq});
        }
        out.complex_events.push_back(std::move(ce));
      };

      // Extension: the oldest qualifying partial match takes the event.
      for (auto& pm : pms) {
        if (!pm.alive) continue;
        const Sequence& seq = pattern.alternatives[pm.alt];
        const int cur_idx = seq.positives[pm.pos];
        const PatternElement& cur = seq.elements[cur_idx];
        int target = -1;
        if (cur.accepts(ev.type)) {
          MatchContext ctx(&pm, rt.slots[pm.alt], ev, cur_idx);
          if (cur.predicate.eval(ctx)) target = cur_idx;
        }
        if (target < 0 && cur.kind == ElementKind::Kleene && pm.count >= 1 &&
            pm.pos + 1 < seq.positives.size()) {
          const int next_idx = seq.positives[pm.pos + 1];
          const PatternElement& next = seq.elements[next_idx];
          if (next.accepts(ev.type)) {
            MatchContext ctx(&pm, rt.slots[pm.alt], ev, next_idx);
            if (next.predicate.eval(ctx)) {
              target = next_idx;
              ++pm.pos;
              pm.count = 0;
            }
          }
        }
        if (target < 0) continue;
        bind(pm, target);
        if (notify)
          out.notifications.push_back({NotificationKind::Extend, AbandonReason::None, p, ws.id, pm.id, ev.seq});
        if (advance_after_bind(pm)) complete(pm);
        break;
      }

      // Every first-element match opens a new partial match.
      for (std::uint32_t a = 0; a < pattern.alternatives.size(); ++a) {
        const Sequence& seq = pattern.alternatives[a];
        const PatternElement& first = seq.elements.front();
        if (!first.accepts(ev.type)) continue;
        MatchContext ctx(nullptr, rt.slots[a], ev, 0);
        if (!first.predicate.eval(ctx)) continue;
        PartialMatch pm;
        pm.id = next_pm_id_++;
        pm.alt = a;
        pm.last_bound.assign(seq.elements.size(), -1);
        pm.sums.assign(rt.slots[a].count, 0.0);
        bind(pm, 0);
        if (notify)
          out.notifications.push_back({NotificationKind::Open, AbandonReason::None, p, ws.id, pm.id, ev.seq});
        pms.push_back(std::move(pm));
        if (advance_after_bind(pms.back())) complete(pms.back());
      }

      std::erase_if(pms, [](const PartialMatch& pm) { return !pm.alive; });
    }
  }
}

StepResult Engine::process(const Event& e) {
  StepResult out;
  process(e, out);
  return out;
}

void Engine::flush(StepResult& out) {
  for (std::uint32_t p = 0; p < patterns_.size(); ++p)
    for (WindowId w : runtime_[p].clock.close_all()) close_window(p, w, out);
  history_.clear();
}

StepResult Engine::flush() {
  StepResult out;
  flush(out);
  return out;
}

std::vector<ComplexEvent> detect_all(const std::vector<Pattern>& patterns,
                                     const std::vector<Event>& events, EngineOptions options) {
  options.record_notifications = false;
  options.track_contributions = false;
  Engine engine(patterns, options);
  StepResult step;
  std::vector<ComplexEvent> all;
  for (const auto& e : events) {
    engine.process(e, step);
    for (auto& ce : step.complex_events) all.push_back(std::move(ce));
    step.clear();
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace shedcep
