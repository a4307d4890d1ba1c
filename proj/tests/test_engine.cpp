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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "shedcep/engine.hpp"
#include "shedcep/synthetic.hpp"
#include "support/cep_oracle.hpp"
#include "support/oracle_cases.hpp"
#include "support/test_util.hpp"

using namespace shedcep;
using shedcep::testing::letters_schema;
using shedcep::testing::make_event;
using shedcep::testing::patterns_from;
using shedcep::testing::random_stream;

namespace {

const char* kNegatedQuery = R"({"patterns": [
  {"id": "q", "weight": 1.5, "window": {"size": 250, "slide": 10},
   "sequences": [{"elements": [{"type": "R"}, {"type": "C", "negated": true, "where": "C.ID = R.ID"},
                               {"type": "X"}],
                  "where": "R.ID = X.ID"}]}]})";

StreamSchema rcx_schema() { return StreamSchema({"R", "C", "X"}, {AttributeDecl{"ID", 0, 100, 1}}); }

std::vector<Event> rcx_stream() {
  return {make_event(0, 0, 0, {1}), make_event(1, 1, 1, {1}), make_event(2, 2, 2, {2}), make_event(3, 3, 0, {3}),
          make_event(4, 4, 2, {3})};
}

struct Run {
  std::vector<ComplexEvent> ces;
  std::vector<Notification> notes;
  ContributionLedger ledger;
};

Run run_engine(const std::vector<Pattern>& ps, const std::vector<Event>& events, EngineOptions opt = {}) {
  Engine engine(ps, opt);
  StepResult out;
  for (const auto& e : events) engine.process(e, out);
  engine.flush(out);
  Run r{out.complex_events, out.notifications, engine.contributions()};
  std::sort(r.ces.begin(), r.ces.end());
  return r;
}

using CreditRow = std::tuple<Seq, int, std::uint32_t, WindowId>;

std::vector<CreditRow> engine_credits(const ContributionLedger& ledger) {
  std::vector<CreditRow> out;
  for (const auto& [seq, credits] : ledger.all())
    for (const auto& c : credits) out.emplace_back(seq, static_cast<int>(c.kind), c.pattern, c.window);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CreditRow> oracle_credits(const oracle::OracleResult& r) {
  std::vector<CreditRow> out;
  for (const auto& ce : r.complex_events)
    for (Seq s : ce.events) out.emplace_back(s, static_cast<int>(CreditKind::Complex), ce.pattern, ce.window);
  for (const auto& [s, p, w] : r.abandon_credits) out.emplace_back(s, static_cast<int>(CreditKind::Abandon), p, w);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(WindowClock, OpensOnSlideBoundaries) {
  WindowClock clock(250, 10);
  auto a = clock.advance(0);
  EXPECT_EQ(a.opened, (std::vector<WindowId>{0}));
  auto b = clock.advance(35);
  EXPECT_EQ(b.opened, (std::vector<WindowId>{1, 2, 3}));
  EXPECT_TRUE(b.closed.empty());
  EXPECT_EQ(clock.start(3), 30.0);
  EXPECT_EQ(clock.end(3), 280.0);
}

TEST(WindowClock, ShortStreamHasOneWindow) {
  WindowClock clock(250, 10);
  clock.advance(2);
  clock.advance(7.5);
  EXPECT_EQ(clock.close_all(), (std::vector<WindowId>{0}));
}

TEST(WindowClock, ClosesExpiredAndSkipsDeadWindows) {
  WindowClock clock(20, 10);
  clock.advance(0);
  auto a = clock.advance(100);
  EXPECT_EQ(a.closed, (std::vector<WindowId>{0}));
  EXPECT_EQ(a.opened, (std::vector<WindowId>{9, 10}));
}

TEST(Engine, NegationDetectsOnlyTheSecondPair) {
  const auto schema = rcx_schema();
  const auto r = run_engine(patterns_from(kNegatedQuery, schema), rcx_stream());
  ASSERT_EQ(r.ces.size(), 1u);
  EXPECT_EQ(r.ces[0].events, (std::vector<Seq>{3, 4}));
  EXPECT_EQ(r.ces[0].window, 0);
  EXPECT_EQ(r.ces[0].weight, 1.5);
  const bool negation_abandon = std::any_of(r.notes.begin(), r.notes.end(), [](const Notification& n) {
    return n.kind == NotificationKind::Abandon && n.reason == AbandonReason::Negation && n.cause == Seq{1};
  });
  EXPECT_TRUE(negation_abandon);
}

TEST(Engine, NegationContributions) {
  const auto schema = rcx_schema();
  const auto r = run_engine(patterns_from(kNegatedQuery, schema), rcx_stream());
  EXPECT_EQ(r.ledger.find(0), nullptr);
  EXPECT_EQ(r.ledger.find(2), nullptr);
  ASSERT_NE(r.ledger.find(1), nullptr);
  ASSERT_EQ(r.ledger.find(1)->size(), 1u);
  EXPECT_EQ(r.ledger.find(1)->front().kind, CreditKind::Abandon);
  EXPECT_EQ(r.ledger.find(1)->front().weight, 1.5);
  for (Seq s : {Seq{3}, Seq{4}}) {
    ASSERT_NE(r.ledger.find(s), nullptr);
    ASSERT_EQ(r.ledger.find(s)->size(), 1u);
    EXPECT_EQ(r.ledger.find(s)->front().kind, CreditKind::Complex);
    EXPECT_EQ(r.ledger.total_weight(s), 1.5);
  }
}

TEST(Engine, NotificationLifecycleWithNegation) {
  const auto schema = rcx_schema();
  const auto r = run_engine(patterns_from(kNegatedQuery, schema), rcx_stream());
  std::vector<NotificationKind> kinds;
  for (const auto& n : r.notes) kinds.push_back(n.kind);
  EXPECT_EQ(kinds, (std::vector<NotificationKind>{NotificationKind::Open, NotificationKind::Abandon,
                                                  NotificationKind::Open, NotificationKind::Extend,
                                                  NotificationKind::Complete}));
}

TEST(Engine, NoFirstElementEventsMeansNothing) {
  const auto schema = rcx_schema();
  const std::vector<Event> events = {make_event(0, 0, 1, {1}), make_event(1, 1, 2, {1})};
  const auto r = run_engine(patterns_from(kNegatedQuery, schema), events);
  EXPECT_TRUE(r.ces.empty());
  EXPECT_TRUE(r.notes.empty());
  EXPECT_TRUE(r.ledger.empty());
}

TEST(Engine, EmptyRun) {
  const auto schema = rcx_schema();
  const auto r = run_engine(patterns_from(kNegatedQuery, schema), {});
  EXPECT_TRUE(r.ces.empty());
  EXPECT_TRUE(r.ledger.empty());
}

TEST(Engine, FirstSelectionAndConsumption) {
  const auto schema = letters_schema(3);
  const auto ps = patterns_from(R"({"patterns": [{"id": "AB", "window": {"size": 100, "slide": 100},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B"}]}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 0, {1}), make_event(1, 1, 0, {1}), make_event(2, 2, 1, {1}),
                                     make_event(3, 3, 1, {1})};
  const auto r = run_engine(ps, events);
  ASSERT_EQ(r.ces.size(), 2u);
  EXPECT_EQ(r.ces[0].events, (std::vector<Seq>{0, 2}));
  EXPECT_EQ(r.ces[1].events, (std::vector<Seq>{1, 3}));
}

TEST(Engine, ConsumptionKillsSiblingAlternatives) {
  const auto schema = letters_schema(3);
  const auto ps = patterns_from(R"({"patterns": [{"id": "D", "window": {"size": 100, "slide": 100},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B"}]},
                    {"elements": [{"type": "A"}, {"type": "C"}]}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 0, {1}), make_event(1, 1, 1, {1}), make_event(2, 2, 2, {1})};
  const auto r = run_engine(ps, events);
  ASSERT_EQ(r.ces.size(), 1u);
  EXPECT_EQ(r.ces[0].events, (std::vector<Seq>{0, 1}));
  const bool consumed = std::any_of(r.notes.begin(), r.notes.end(), [](const Notification& n) {
    return n.kind == NotificationKind::Abandon && n.reason == AbandonReason::Consumed;
  });
  EXPECT_TRUE(consumed);
}

TEST(Engine, ConsumptionIsPerWindow) {
  const auto schema = letters_schema(3);
  const auto ps = patterns_from(R"({"patterns": [{"id": "AB", "window": {"size": 20, "slide": 10},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B"}]}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 2, {1}), make_event(1, 12, 0, {1}), make_event(2, 15, 1, {1})};
  const auto r = run_engine(ps, events);
  ASSERT_EQ(r.ces.size(), 2u);
  EXPECT_EQ(r.ces[0].window, 0);
  EXPECT_EQ(r.ces[1].window, 1);
  EXPECT_EQ(r.ces[0].events, r.ces[1].events);
}

TEST(Engine, KleeneAccumulatesWithRunningSum) {
  const auto schema = letters_schema(3, "V1", 100);
  const auto ps = patterns_from(R"({"patterns": [{"id": "Q3", "window": {"size": 250, "slide": 10},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B", "kleene": true}, {"type": "C"}],
                     "where": "A.V1 + sum(B.V1) < B.V1 && A.V1 + sum(B.V1) < C.V1"}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 0, {1}), make_event(1, 1, 1, {2}), make_event(2, 2, 1, {2}),
                                     make_event(3, 3, 1, {5}), make_event(4, 4, 2, {9}), make_event(5, 5, 2, {20})};
  // B2 fails 1 + 2 < 2 while B3 accumulates.
  // C4 satisfies 1 + 7 < 9 and completes the match.
  const auto r = run_engine(ps, events);
  ASSERT_EQ(r.ces.size(), 1u);
  EXPECT_EQ(r.ces[0].events, (std::vector<Seq>{0, 1, 3, 4}));
}

TEST(Engine, AnyBindsFirstKQualifying) {
  const auto schema = letters_schema(3);
  const auto ps = patterns_from(R"({"patterns": [{"id": "QA", "window": {"size": 30, "slide": 30},
      "sequences": [{"elements": [{"type": "A"}, {"any": 2, "types": ["B", "C"], "alias": "D",
                                                   "where": "D.V1 >= A.V1"}]}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 0, {5}), make_event(1, 1, 1, {4}), make_event(2, 2, 2, {6}),
                                     make_event(3, 3, 1, {5}), make_event(4, 4, 2, {9})};
  const auto r = run_engine(ps, events);
  ASSERT_EQ(r.ces.size(), 1u);
  EXPECT_EQ(r.ces[0].events, (std::vector<Seq>{0, 2, 3}));
}

TEST(Engine, NegationKillsAllOrOldest) {
  const auto schema = letters_schema(3);
  const auto ps = patterns_from(R"({"patterns": [{"id": "N", "window": {"size": 100, "slide": 100},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B", "negated": true}, {"type": "C"}]}]}]})",
                                schema);
  const std::vector<Event> events = {make_event(0, 0, 0, {1}), make_event(1, 1, 0, {1}), make_event(2, 2, 1, {1}),
                                     make_event(3, 3, 2, {1})};
  const auto all = run_engine(ps, events);
  EXPECT_TRUE(all.ces.empty());
  ASSERT_NE(all.ledger.find(2), nullptr);
  EXPECT_EQ(all.ledger.find(2)->size(), 1u);

  EngineOptions one;
  one.negation_kills_all = false;
  const auto first = run_engine(ps, events, one);
  ASSERT_EQ(first.ces.size(), 1u);
  EXPECT_EQ(first.ces[0].events, (std::vector<Seq>{1, 3}));
}

TEST(Engine, CompleteMatchesStayInsideTheirWindow) {
  const auto schema = letters_schema(6);
  const auto ps = patterns_from(R"({"patterns": [{"id": "Q1", "window": {"size": 40, "slide": 5},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B"}, {"type": "C"}]}]}]})",
                                schema);
  const auto events = generate_synthetic(dataset_preset("DS8", 5000, 3));
  std::vector<double> ts(events.size());
  for (const auto& e : events) ts[e.seq] = e.ts;
  const auto ces = detect_all(ps, events);
  ASSERT_FALSE(ces.empty());
  for (const auto& ce : ces) {
    const double start = static_cast<double>(ce.window) * 5.0;
    EXPECT_GE(ts[ce.events.front()], start);
    EXPECT_LT(ts[ce.events.back()], start + 40.0);
    EXPECT_LE(ts[ce.events.back()] - ts[ce.events.front()], 40.0);
  }
}

TEST(Engine, Deterministic) {
  const auto schema = letters_schema(6);
  const auto ps = patterns_from(R"({"patterns": [{"id": "N", "window": {"size": 60, "slide": 5},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B", "negated": true, "where": "B.V1 = A.V1"},
                                  {"type": "C"}]}]}]})",
                                schema);
  const auto events = generate_synthetic(dataset_preset("DS8", 3000, 5));
  const auto a = run_engine(ps, events);
  const auto b = run_engine(ps, events);
  EXPECT_EQ(a.ces, b.ces);
  EXPECT_EQ(a.notes, b.notes);
  EXPECT_EQ(engine_credits(a.ledger), engine_credits(b.ledger));
}

TEST(Engine, SheddingCanProduceTuplesOutsideGroundTruth) {
  // Dropping the oldest opener lets a younger one bind: the detection is
  // new under exact tuple identity even though the pattern has no negation.
  const auto schema = letters_schema(2);
  const auto ps = patterns_from(R"({"patterns": [{"id": "AB", "window": {"size": 100, "slide": 100},
      "sequences": [{"elements": [{"type": "A"}, {"type": "B"}]}]}]})",
                                schema);
  const std::vector<Event> full = {make_event(0, 0, 0, {1}), make_event(1, 1, 0, {1}), make_event(2, 2, 1, {1})};
  const std::vector<Event> shed = {full[1], full[2]};
  const auto g = detect_all(ps, full);
  const auto d = detect_all(ps, shed);
  ASSERT_EQ(g.size(), 1u);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NE(g[0], d[0]);
}

// Engine against the reference matcher on many short random streams.

namespace shedcep::oracle {
void PrintTo(const OracleCase& c, std::ostream* os) { *os << c.name; }
}  // namespace shedcep::oracle

using oracle::OracleCase;

class EngineOracle : public ::testing::TestWithParam<OracleCase> {};

TEST_P(EngineOracle, MatchesReference) {
  const auto& c = GetParam();
  const auto schema = letters_schema(c.types);
  const auto ps = patterns_from(c.query, schema);
  std::size_t detections = 0;
  for (bool kills_all : {true, false}) {
    EngineOptions opt;
    opt.negation_kills_all = kills_all;
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
      const auto events = random_stream(seed * 7919 + c.types, 200, c.types, c.max_gap);
      const auto r = run_engine(ps, events, opt);
      const auto o = oracle::run(ps, events, kills_all);
      ASSERT_EQ(r.ces, o.complex_events) << c.name << " seed " << seed << " kills_all " << kills_all;
      ASSERT_EQ(engine_credits(r.ledger), oracle_credits(o)) << c.name << " seed " << seed;
      detections += o.complex_events.size();
    }
  }
  EXPECT_GE(detections, 100u) << "streams too sparse to exercise " << c.name;
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, EngineOracle,
    ::testing::ValuesIn(oracle::shape_cases()),
    [](const ::testing::TestParamInfo<OracleCase>& info) {
      std::string n = info.param.name;
      std::replace(n.begin(), n.end(), '-', '_');
      return n;
    });
