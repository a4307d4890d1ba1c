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

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "shedcep/event.hpp"
#include "shedcep/pattern.hpp"

namespace shedcep {

using WindowId = std::int64_t;

/// Identity of a detection: (pattern, window, contributing events).
struct ComplexEvent {
  std::uint32_t pattern = 0;
  WindowId window = 0;
  std::vector<Seq> events;
  double weight = 1.0;

  friend auto operator<=>(const ComplexEvent& a, const ComplexEvent& b) {
    if (auto c = a.pattern <=> b.pattern; c != 0) return c;
    if (auto c = a.window <=> b.window; c != 0) return c;
    return a.events <=> b.events;
  }
  friend bool operator==(const ComplexEvent& a, const ComplexEvent& b) {
    return a.pattern == b.pattern && a.window == b.window && a.events == b.events;
  }
};

enum class NotificationKind { Open, Extend, Abandon, Complete };
enum class AbandonReason { None, Negation, WindowClose, Consumed };

struct Notification {
  NotificationKind kind = NotificationKind::Open;
  AbandonReason reason = AbandonReason::None;
  std::uint32_t pattern = 0;
  WindowId window = 0;
  std::uint64_t pm = 0;
  /// Event that triggered the transition; empty for window-close abandons.
  std::optional<Seq> cause;

  bool operator==(const Notification&) const = default;
};

struct StepResult {
  std::vector<ComplexEvent> complex_events;
  std::vector<Notification> notifications;

  void clear() {
    complex_events.clear();
    notifications.clear();
  }
};

/// Time-based sliding windows: window k covers [k*slide, k*slide + size).
class WindowClock {
 public:
  WindowClock(double size, double slide);

  struct Advance {
    std::vector<WindowId> opened;
    std::vector<WindowId> closed;
  };

  /// Moves the clock to `ts`: closes every open window whose end is <= ts
  /// and opens one window per slide boundary in (last start, ts]. Windows
  /// that would already be expired at `ts` are skipped.
  Advance advance(double ts);
  /// Closes every remaining window.
  std::vector<WindowId> close_all();

  double start(WindowId id) const { return static_cast<double>(id) * slide_; }
  double end(WindowId id) const { return start(id) + size_; }
  const std::deque<WindowId>& open() const { return open_; }

 private:
  double size_;
  double slide_;
  std::optional<WindowId> last_opened_;
  std::deque<WindowId> open_;
};

enum class CreditKind { Complex, Abandon };

struct Credit {
  CreditKind kind = CreditKind::Complex;
  std::uint32_t pattern = 0;
  WindowId window = 0;
  double weight = 0.0;

  bool operator==(const Credit&) const = default;
};

/// Per-event contribution credits: every complex event an event is bound
/// in (weight w_q each) and one credit per (pattern, window) in which the
/// event abandoned partial matches through a negated element.
class ContributionLedger {
 public:
  void credit(Seq seq, Credit c) { credits_[seq].push_back(c); }
  const std::vector<Credit>* find(Seq seq) const;
  double total_weight(Seq seq) const;
  std::size_t size() const { return credits_.size(); }
  bool empty() const { return credits_.empty(); }
  void clear() { credits_.clear(); }
  const std::unordered_map<Seq, std::vector<Credit>>& all() const { return credits_; }

 private:
  std::unordered_map<Seq, std::vector<Credit>> credits_;
};

struct EngineOptions {
  /// Kill every live partial match whose negated guard fires (true) or only
  /// the oldest one (false).
  bool negation_kills_all = true;
  bool record_notifications = true;
  bool track_contributions = true;
};

/// Sliding-window pattern matcher with first selection: every
/// first-element event opens a partial match, later events extend only the
/// oldest qualifying partial match per pattern and window. The first bound
/// event of a completed match is consumed within its window; all other
/// bindings are reusable.
class Engine {
 public:
  Engine(std::vector<Pattern> patterns, EngineOptions options = {});
  ~Engine();
  Engine(Engine&&) noexcept;
  Engine& operator=(Engine&&) noexcept;

  /// Processes one admitted event; results are appended to `out`.
  void process(const Event& e, StepResult& out);
  StepResult process(const Event& e);
  /// End of stream: closes every open window.
  void flush(StepResult& out);
  StepResult flush();

  const std::vector<Pattern>& patterns() const { return patterns_; }
  const ContributionLedger& contributions() const { return ledger_; }
  ContributionLedger& contributions() { return ledger_; }
  std::vector<WindowId> open_windows(std::size_t pattern) const;
  std::size_t live_partial_matches() const;

 private:
  struct PatternRuntime;
  void close_window(std::uint32_t p, WindowId w, StepResult& out);

  std::vector<Pattern> patterns_;
  EngineOptions options_;
  std::vector<PatternRuntime> runtime_;
  ContributionLedger ledger_;
  std::deque<Event> history_;
  double max_window_ = 0.0;
  std::uint64_t next_pm_id_ = 0;
  bool seen_event_ = false;
  double last_ts_ = 0.0;
};

/// Runs `events` through a fresh engine and returns every detection, sorted.
std::vector<ComplexEvent> detect_all(const std::vector<Pattern>& patterns,
                                     const std::vector<Event>& events,
                                     EngineOptions options = {});

}  // namespace shedcep
