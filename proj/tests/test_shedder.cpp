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

#include <random>

#include "shedcep/shedder.hpp"
#include "shedcep/zobrist.hpp"

using namespace shedcep;

namespace {

UtilityHistogram example_histogram() {
  UtilityHistogram h;
  h.add(0.2, 40);
  h.add(0.5, 35);
  h.add(0.9, 25);
  return h;
}

Event ev(Seq seq, TypeId type, double v) {
  Event e;
  e.seq = seq;
  e.ts = static_cast<double>(seq);
  e.type = type;
  e.attrs = {v};
  return e;
}

// Table model over `types` types with one attribute V1 in 1..10. The key of
// an A event with V1 = 5 against an empty pane has utility 0.5.
std::shared_ptr<ShedderModel> table_model(std::size_t types, DefaultUtility fallback = DefaultUtility::One) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < types; ++i) names.push_back("T" + std::to_string(i));
  auto m = std::make_shared<ShedderModel>();
  m->kind = ShedderKind::GspiceH;
  m->schema = StreamSchema(names, {AttributeDecl{"V1", 1, 10, 1}});
  m->pane.length = 4;
  const std::vector<AggregatedObservation> groups = {
      {FeatureKey{0, std::vector<int>(types, 0), {4}}, 1.0, 2},
      {FeatureKey{0, std::vector<int>(types, 0), {0}}, 0.2, 1},
  };
  m->utility = std::make_shared<UtilityTable>(
      UtilityTable::build(groups, make_zobrist_keys(m->schema, m->pane, 7), fallback));
  m->histogram = example_histogram();
  return m;
}

ShedderConfig config_for(ShedderKind kind) {
  ShedderConfig c;
  c.kind = kind;
  return c;
}

}  // namespace

TEST(Threshold, CumulativeRule) {
  const auto h = example_histogram();
  EXPECT_EQ(select_threshold(h, 0.5).value(), 0.5);
  EXPECT_EQ(select_threshold(h, 0.4).value(), 0.2);
  EXPECT_EQ(select_threshold(h, 0.41).value(), 0.5);
  EXPECT_EQ(select_threshold(h, 0.75).value(), 0.5);
  EXPECT_EQ(select_threshold(h, 1.0).value(), 0.9);
  EXPECT_TRUE(select_threshold(h, 1.0).drops(0.9));
}

TEST(Threshold, ZeroRhoDropsNothing) {
  const auto t = select_threshold(example_histogram(), 0.0);
  EXPECT_EQ(t.quantum, UtilityThreshold::kDropNothing);
  EXPECT_FALSE(t.drops(0.0));
  EXPECT_FALSE(t.drops(-5.0));
}

TEST(Threshold, Errors) {
  EXPECT_THROW(select_threshold(UtilityHistogram{}, 0.5), ConfigError);
  EXPECT_THROW(select_threshold(example_histogram(), 1.5), ConfigError);
}

TEST(Threshold, DecimalRhoHitsExactCounts) {
  UtilityHistogram h;
  for (int i = 0; i < 10; ++i) h.add(0.1 * i, 1);
  for (int k = 1; k <= 10; ++k) {
    const auto t = select_threshold(h, k / 10.0);
    EXPECT_EQ(t.quantum, UtilityHistogram::quantize(0.1 * (k - 1))) << k;
  }
}

TEST(Threshold, QuantizesToMilli) {
  EXPECT_EQ(UtilityHistogram::quantize(0.6666666), 667);
  EXPECT_EQ(UtilityHistogram::quantize(0.0004), 0);
  UtilityThreshold t{UtilityHistogram::quantize(0.667)};
  EXPECT_TRUE(t.drops(2.0 / 3.0));
}

TEST(Rho, Formula) {
  EXPECT_EQ(estimate_rho(100, 100, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(estimate_rho(200, 100, 0, 1), 0.5);
  const double lambda = 140, delta = 2.0;
  EXPECT_NEAR(estimate_rho(lambda, 100, 0.1 * lambda * delta, delta), 0.3857142857142857, 1e-12);
  EXPECT_EQ(estimate_rho(50, 100, 0, 1), 0.0);
  EXPECT_EQ(estimate_rho(1000, 1, 0, 1), 0.95);
  EXPECT_EQ(estimate_rho(1000, 1, 0, 1, 0.5), 0.5);
}

TEST(Detector, HysteresisTrace) {
  OverloadDetector d(1.0);
  EXPECT_FALSE(d.update(0.0));
  EXPECT_FALSE(d.update(0.79));
  EXPECT_TRUE(d.update(0.8));
  EXPECT_TRUE(d.update(0.85));
  EXPECT_TRUE(d.update(0.6));
  EXPECT_TRUE(d.update(0.51));
  EXPECT_FALSE(d.update(0.5));
  EXPECT_FALSE(d.update(0.7));
  EXPECT_THROW(OverloadDetector(1.0, 0.5, 0.6), ConfigError);
  EXPECT_THROW(OverloadDetector(0.0), ConfigError);
}

TEST(Ewma, SeedsThenSmooths) {
  Ewma e(0.3);
  EXPECT_FALSE(e.seeded());
  e.add(10);
  EXPECT_EQ(e.value(), 10);
  e.add(20);
  EXPECT_DOUBLE_EQ(e.value(), 13.0);
}

TEST(Shedder, NotOverloadedNeverDrops) {
  Shedder s(config_for(ShedderKind::GspiceH), table_model(2), 1.0);
  for (Seq i = 0; i < 100; ++i) EXPECT_FALSE(s.drop(ev(i, i % 2, 5)));
}

TEST(Shedder, DropsAtThresholdInclusive) {
  Shedder s(config_for(ShedderKind::GspiceH), table_model(2), 1.0);
  s.force_overload(true, 0.5);
  EXPECT_EQ(s.threshold().value(), 0.5);
  EXPECT_TRUE(s.drop(ev(0, 0, 5)));   // U = 0.5
  EXPECT_TRUE(s.drop(ev(0, 0, 1)));   // U = 0.2
  EXPECT_FALSE(s.drop(ev(0, 0, 6)));  // unseen key, default 1
  s.force_overload(true, 0.3);
  EXPECT_EQ(s.threshold().value(), 0.2);
  EXPECT_FALSE(s.drop(ev(0, 0, 5)));
  s.force_overload(false, 0.0);
  EXPECT_FALSE(s.drop(ev(0, 0, 1)));
}

TEST(Shedder, NoneKindNeverDrops) {
  Shedder s(config_for(ShedderKind::None), nullptr, 1.0);
  for (Seq i = 0; i < 100; ++i) EXPECT_FALSE(s.on_event(ev(i, 0, 1), LoadSample{i + 10.0, 0.0, 1000}));
  EXPECT_EQ(s.counters().dropped, 0u);
}

TEST(Shedder, RejectsMismatchedModel) {
  EXPECT_THROW(Shedder(config_for(ShedderKind::GspiceT), table_model(2), 1.0), ConfigError);
  EXPECT_THROW(Shedder(config_for(ShedderKind::GspiceH), nullptr, 1.0), ConfigError);
  EXPECT_THROW(Shedder(config_for(ShedderKind::GspiceH), table_model(2), 0.0), ConfigError);
}

TEST(Shedder, HotPathXorBoundIndependentOfTypeCount) {
  for (std::size_t types : {2u, 50u}) {
    auto model = table_model(types);
    Shedder s(config_for(ShedderKind::GspiceH), model, 1.0);
    s.force_overload(true, 0.5);
    std::mt19937_64 rng(types);
    std::uniform_int_distribution<TypeId> type(0, static_cast<TypeId>(types - 1));
    const std::size_t n = 10000;
    std::uint64_t last = 0;
    for (Seq i = 0; i < n; ++i) {
      // Keep the detector on: queue latency well above the bound.
      s.on_event(ev(i, type(rng), 1 + static_cast<double>(i % 10)), LoadSample{i + 10.0, static_cast<double>(i), 0});
      const auto ops = s.xor_tally().ops - last;
      ASSERT_LE(ops, 4u + model->schema.attribute_count()) << "types " << types;
      last = s.xor_tally().ops;
    }
  }
}

TEST(Shedder, DroppedEventsStillAdvanceThePane) {
  auto model = table_model(3, DefaultUtility::Zero);
  Shedder s(config_for(ShedderKind::GspiceH), model, 1.0);
  const auto& table = static_cast<const UtilityTable&>(*model->utility);
  PredecessorPane pane(3, model->pane);
  PaneKey reference(table.keys(), model->pane);
  std::mt19937_64 rng(1);
  std::uint64_t drops = 0;
  for (Seq i = 0; i < 2000; ++i) {
    const Event e = ev(i, static_cast<TypeId>(rng() % 3), static_cast<double>(1 + rng() % 10));
    drops += s.on_event(e, LoadSample{i + 5.0, static_cast<double>(i), 100}) ? 1 : 0;
    reference.apply(pane.push(e.type, e.ts));
    ASSERT_EQ(s.k1(), reference.k1());
  }
  EXPECT_GT(drops, 0u);
}

TEST(Shedder, ControllerActivatesAndUpdatesRho) {
  Shedder s(config_for(ShedderKind::GspiceH), table_model(2), 2.0);
  // Arrivals every 0.1, each finishing 1 s late: overloaded from the start.
  for (Seq i = 0; i < 200; ++i) {
    const double arrival = 0.1 * static_cast<double>(i);
    s.on_event(ev(i, 0, 5), LoadSample{arrival + 1.0, arrival, 50});
    s.record_service(0.2);
  }
  EXPECT_TRUE(s.overloaded());
  EXPECT_EQ(s.counters().activations, 1u);
  EXPECT_GT(s.counters().rho_updates, 5u);
  ASSERT_TRUE(s.lambda().has_value());
  ASSERT_TRUE(s.mu().has_value());
  EXPECT_NEAR(*s.lambda(), 10.0, 0.5);
  EXPECT_NEAR(*s.mu(), 5.0, 1e-9);
  EXPECT_NEAR(s.rho(), 0.95, 1e-12);  // backlog term saturates at rho_max
}

TEST(Shedder, SwapModelKeepsPaneKey) {
  auto model = table_model(2);
  Shedder s(config_for(ShedderKind::GspiceH), model, 1.0);
  for (Seq i = 0; i < 7; ++i) s.warm(ev(i, i % 2, 3));
  const auto k1 = s.k1();
  s.swap_model(table_model(2));
  EXPECT_EQ(s.k1(), k1);
}

TEST(Bl, FillsLowestScoreTypesFirst) {
  BlModel m;
  m.score = {3.0, 1.0};
  m.share = {0.5, 0.5};
  const auto p = m.drop_probabilities(0.4);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_DOUBLE_EQ(p[1], 0.8);
  const auto q = m.drop_probabilities(0.75);
  EXPECT_DOUBLE_EQ(q[0], 0.5);
  EXPECT_EQ(q[1], 1.0);
}

TEST(Bl, OnlyTheLowScoreTypeIsDropped) {
  auto model = std::make_shared<ShedderModel>();
  model->kind = ShedderKind::Bl;
  model->schema = StreamSchema({"A", "B"}, {AttributeDecl{"V1", 1, 10, 1}});
  model->bl.score = {3.0, 1.0};
  model->bl.share = {0.5, 0.5};
  Shedder s(config_for(ShedderKind::Bl), model, 1.0);
  s.force_overload(true, 0.5);
  std::uint64_t dropped_a = 0, dropped_b = 0;
  for (Seq i = 0; i < 10000; ++i) {
    const Event e = ev(i, i % 2, 1);
    if (s.drop(e)) (e.type == 0 ? dropped_a : dropped_b)++;
  }
  EXPECT_EQ(dropped_a, 0u);
  EXPECT_EQ(dropped_b, 5000u);
}

TEST(Bl, SeededSamplingIsReproducible) {
  auto model = std::make_shared<ShedderModel>();
  model->kind = ShedderKind::Bl;
  model->schema = StreamSchema({"A"}, {});
  model->bl.score = {1.0};
  model->bl.share = {1.0};
  auto run = [&] {
    Shedder s(config_for(ShedderKind::Bl), model, 1.0);
    s.force_overload(true, 0.3);
    std::vector<bool> out;
    std::uint64_t n = 0;
    for (Seq i = 0; i < 20000; ++i) {
      out.push_back(s.drop(ev(i, 0, 1)));
      n += out.back();
    }
    EXPECT_NEAR(static_cast<double>(n) / 20000.0, 0.3, 0.02);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Espice, PositionBins) {
  EspiceModel m;
  m.position_bin = 5;
  EXPECT_EQ(m.bin_of(7), 1);
  EXPECT_EQ(m.bin_of(4), 0);
  m.type_count = 1;
  m.utility = {{0.5, std::nan("")}};
  m.default_utility = {0.25};
  EXPECT_EQ(m.lookup(0, 3), 0.5);
  EXPECT_EQ(m.lookup(0, 7), 0.25);
  EXPECT_EQ(m.lookup(0, 100), 0.25);
}

TEST(Espice, PositionCountsEventsOfTheOldestOpenWindow) {
  WindowPositionTracker t(10, 5);
  std::vector<std::size_t> pos;
  for (double ts : {0.0, 1.0, 2.0, 6.0, 9.0, 11.0, 12.0}) {
    pos.push_back(t.position(ts));
    t.push(ts);
  }
  // At 11 the oldest window holding it starts at 5 (events 6 and 9 precede).
  EXPECT_EQ(pos, (std::vector<std::size_t>{0, 1, 2, 3, 4, 2, 3}));
}

TEST(Espice, SingleTypeUniformContributionsTreatEveryEventAlike) {
  auto model = std::make_shared<ShedderModel>();
  model->kind = ShedderKind::Espice;
  model->schema = StreamSchema({"A"}, {});
  model->espice.window_size = 10;
  model->espice.slide = 10;
  model->espice.type_count = 1;
  model->espice.utility = {{0.4, 0.4, 0.4}};
  model->espice.default_utility = {0.4};
  model->histogram.add(0.4, 100);
  for (double rho : {0.2, 0.7}) {
    Shedder s(config_for(ShedderKind::Espice), model, 1.0);
    s.force_overload(true, rho);
    std::uint64_t dropped = 0;
    for (Seq i = 0; i < 30; ++i) {
      dropped += s.drop(ev(i, 0, 1)) ? 1 : 0;
      s.warm(ev(i, 0, 1));
    }
    EXPECT_TRUE(dropped == 0 || dropped == 30) << "decision depends on position";
  }
}

TEST(ShedderKind, ParseAndPrint) {
  for (auto k : {ShedderKind::None, ShedderKind::GspiceH, ShedderKind::GspiceT, ShedderKind::GspiceF,
                 ShedderKind::Espice, ShedderKind::Bl})
    EXPECT_EQ(parse_shedder_kind(to_string(k)), k);
  EXPECT_THROW(parse_shedder_kind("random"), ConfigError);
}
