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

#include "shedcep/stats.hpp"

using namespace shedcep;

namespace {

PaneConfig count_pane(std::size_t length) {
  PaneConfig p;
  p.length = length;
  return p;
}

Observation obs(Seq seq, TypeId type, std::vector<int> freq, std::vector<int> attrs, std::vector<double> credits) {
  return Observation{seq, FeatureKey{type, std::move(freq), std::move(attrs)}, std::move(credits)};
}

// Observations of the statistics-gathering worked example: type A with
// (F_A, F_B) and one binned attribute; credits are complex events of weight 1.
std::vector<Observation> worked_example() {
  return {obs(0, 0, {1, 2}, {5}, {1}), obs(1, 0, {1, 2}, {5}, {}),  obs(2, 0, {1, 2}, {5}, {1}),
          obs(3, 0, {2, 1}, {7}, {}),  obs(4, 0, {2, 1}, {7}, {1}), obs(5, 0, {2, 1}, {8}, {}),
          obs(6, 0, {2, 1}, {8}, {}),  obs(7, 0, {2, 1}, {8}, {1})};
}

}  // namespace

TEST(Pane, CountsTypesInPane) {
  PredecessorPane pane(3, count_pane(4));
  for (TypeId t : {0u, 1u, 2u, 0u}) pane.push(t, 0.0);
  EXPECT_EQ(pane.frequencies(), (std::vector<int>{2, 1, 1}));
}

TEST(Pane, FirstPushIsOneHot) {
  PredecessorPane pane(3, count_pane(4));
  const auto changes = pane.push(2, 0.0);
  EXPECT_EQ(pane.frequencies(), (std::vector<int>{0, 0, 1}));
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].type, 2u);
  EXPECT_EQ(changes[0].old_count, 0);
  EXPECT_EQ(changes[0].new_count, 1);
}

TEST(Pane, EvictionOfSameTypeCancels) {
  PredecessorPane pane(2, count_pane(2));
  pane.push(0, 0.0);
  pane.push(0, 1.0);
  EXPECT_TRUE(pane.push(0, 2.0).empty());
  const auto c = pane.push(1, 3.0);
  ASSERT_EQ(c.size(), 2u);
}

TEST(Pane, RecountOracle) {
  for (std::size_t length : {1u, 10u, 200u}) {
    PredecessorPane pane(5, count_pane(length));
    std::mt19937_64 rng(length);
    std::uniform_int_distribution<TypeId> type(0, 4);
    for (int i = 0; i < 10000; ++i) {
      const auto before = pane.frequencies();
      const auto changes = pane.push(type(rng), i);
      auto after = before;
      for (const auto& c : changes) {
        ASSERT_EQ(after[c.type], c.old_count);
        after[c.type] = c.new_count;
      }
      ASSERT_EQ(after, pane.frequencies());
      std::vector<int> recount(5, 0);
      for (TypeId t : pane.contents()) ++recount[t];
      ASSERT_EQ(recount, pane.frequencies());
      ASSERT_EQ(pane.size(), std::min<std::size_t>(length, static_cast<std::size_t>(i) + 1));
    }
  }
}

TEST(Pane, TimeModeExpiresByAge) {
  PaneConfig cfg;
  cfg.mode = PaneMode::Time;
  cfg.seconds = 5.0;
  cfg.max_frequency = 10;
  PredecessorPane pane(2, cfg);
  pane.push(0, 0.0);
  pane.push(1, 3.0);
  pane.expire(5.0);
  EXPECT_EQ(pane.frequencies(), (std::vector<int>{0, 1}));
  pane.expire(8.5);
  EXPECT_EQ(pane.frequencies(), (std::vector<int>{0, 0}));
}

TEST(Pane, FrequencyBinning) {
  PaneConfig cfg;
  cfg.length = 10;
  cfg.frequency_bin_size = 3;
  EXPECT_EQ(cfg.frequency_cap(), 10);
  EXPECT_EQ(cfg.bin_frequency(0), 0);
  EXPECT_EQ(cfg.bin_frequency(5), 1);
  EXPECT_EQ(cfg.bin_frequency(10), 3);
  EXPECT_EQ(cfg.frequency_bins(), 4);
}

TEST(Aggregate, WorkedExampleGroups) {
  const auto groups = aggregate(worked_example());
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0].key.freq, (std::vector<int>{1, 2}));
  EXPECT_EQ(groups[0].M, 2.0);
  EXPECT_EQ(groups[0].O, 3u);
  EXPECT_EQ(groups[1].key.attrs, (std::vector<int>{7}));
  EXPECT_EQ(groups[1].M, 1.0);
  EXPECT_EQ(groups[1].O, 2u);
  EXPECT_EQ(groups[2].key.attrs, (std::vector<int>{8}));
  EXPECT_EQ(groups[2].M, 1.0);
  EXPECT_EQ(groups[2].O, 3u);
}

TEST(Aggregate, WorkedExampleUtilities) {
  const auto u = utilities(aggregate(worked_example()));
  EXPECT_NEAR(u.at(FeatureKey{0, {1, 2}, {5}}), 0.67, 0.005);
  EXPECT_NEAR(u.at(FeatureKey{0, {2, 1}, {7}}), 0.50, 1e-12);
  EXPECT_NEAR(u.at(FeatureKey{0, {2, 1}, {8}}), 0.33, 0.005);
}

TEST(Aggregate, EmptyAndZeroCredit) {
  EXPECT_TRUE(aggregate(std::vector<Observation>{}).empty());
  std::vector<Observation> zero(5, obs(0, 1, {0}, {0}, {}));
  const auto g = aggregate(zero);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(utilities(g).begin()->second, 0.0);
}

TEST(Aggregate, UtilityMayExceedOne) {
  std::vector<Observation> o(4, obs(0, 0, {1}, {1}, {1.0, 1.0}));
  EXPECT_EQ(utilities(aggregate(o)).begin()->second, 2.0);
}

TEST(Aggregate, LinearInWeights) {
  auto doubled = worked_example();
  for (auto& o : doubled)
    for (auto& c : o.credits) c *= 2.0;
  const auto a = aggregate(worked_example());
  const auto b = aggregate(doubled);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b[i].M, 2.0 * a[i].M);
    EXPECT_EQ(b[i].O, a[i].O);
  }
}

TEST(Aggregate, OrderIndependentCountPreservingDuplicationInvariant) {
  std::mt19937_64 rng(3);
  std::vector<Observation> base;
  std::uniform_int_distribution<int> small(0, 2);
  for (Seq i = 0; i < 2000; ++i) {
    std::vector<double> credits(static_cast<std::size_t>(small(rng)), 1.0 + small(rng));
    base.push_back(obs(i, static_cast<TypeId>(small(rng)), {small(rng), small(rng)}, {small(rng)}, credits));
  }
  const auto g = aggregate(base);
  std::uint64_t total = 0;
  for (const auto& x : g) total += x.O;
  EXPECT_EQ(total, base.size());

  auto shuffled = base;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(aggregate(shuffled), g);

  auto twice = base;
  twice.insert(twice.end(), base.begin(), base.end());
  EXPECT_EQ(utilities(aggregate(twice)), utilities(g));
}

TEST(StatsCollector, SnapshotExcludesTheEventAndAttachesCredits) {
  const StreamSchema schema({"A", "B"}, {AttributeDecl{"V1", 1, 10, 1}});
  StatsCollector stats(schema, count_pane(3));
  for (Seq i = 0; i < 4; ++i) {
    Event e;
    e.seq = i;
    e.ts = static_cast<double>(i);
    e.type = static_cast<TypeId>(i % 2);
    e.attrs = {static_cast<double>(i + 1)};
    stats.observe(e);
  }
  const auto& o = stats.observations();
  ASSERT_EQ(o.size(), 4u);
  EXPECT_EQ(o[0].key.freq, (std::vector<int>{0, 0}));
  EXPECT_EQ(o[1].key.freq, (std::vector<int>{1, 0}));
  EXPECT_EQ(o[3].key.freq, (std::vector<int>{2, 1}));
  EXPECT_EQ(o[3].key.attrs, (std::vector<int>{3}));

  ContributionLedger ledger;
  ledger.credit(2, Credit{CreditKind::Complex, 0, 0, 2.0});
  ledger.credit(2, Credit{CreditKind::Abandon, 0, 1, 1.0});
  stats.attach_credits(ledger);
  EXPECT_EQ(stats.observations()[2].credits.size(), 2u);
  EXPECT_TRUE(stats.observations()[1].credits.empty());
}
