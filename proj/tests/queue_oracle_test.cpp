// Copyright 2026 The supplychain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "oracles/queue_harness.hpp"

namespace supplychain {
namespace {

struct MapCase {
  const char* name;
  LayoutStyle style;
  int centers;
  int spacing;
};

class QueueEquivalence : public ::testing::TestWithParam<MapCase> {};

TEST_P(QueueEquivalence, EventStreamsAgreeOverOneHundredSeeds) {
  const MapCase mc = GetParam();
  auto scene = Scene::generate(make_chain(mc.centers), mc.style, mc.spacing);
  oracle::Totals totals;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EnvParams p;
    p.episode_length = 300;
    p.spawn_prob = 0.15 + 0.05 * static_cast<double>(seed % 5);
    if (seed % 3 != 0) p.repair_time = 5 + static_cast<int>(seed % 40);
    const std::string diff = oracle::compare_with_queue(scene, p, seed, p.episode_length, &totals);
    ASSERT_TRUE(diff.empty()) << mc.name << ": " << diff;
  }
  // The schedule must actually exercise every rule being compared.
  EXPECT_GT(totals.processed, 0);
  EXPECT_GT(totals.repaired, 0);
  EXPECT_GT(totals.self_repaired, 0);
  EXPECT_GT(totals.discarded, 0);
  EXPECT_GT(totals.sank, 0);
}

INSTANTIATE_TEST_SUITE_P(ChainMaps, QueueEquivalence,
                         ::testing::Values(MapCase{"circular", LayoutStyle::kCircular, 4, 2},
                                           MapCase{"linear_d2", LayoutStyle::kLinear, 4, 2},
                                           MapCase{"linear_d5", LayoutStyle::kLinear, 3, 5},
                                           MapCase{"linear_two", LayoutStyle::kLinear, 2, 2}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(QueueOracle, DisagreesWhenTheEngineRuleChanges) {
  // Sanity check of the harness itself: doubling the break probability on
  // one side must be detected.
  auto scene = Scene::generate(make_chain(4), LayoutStyle::kCircular, 2);
  EnvParams p;
  p.episode_length = 300;
  p.spawn_prob = 0.3;
  const TileMap& m = scene->map();
  WorldState s = init_episode(scene, std::vector<int>{1, 2, 3, 4}, p, 1);
  oracle::QueueChain q = oracle::contract(m, p.spawn_prob, 0.5, p.repair_time, 1);
  const std::vector<int> cells{m.anchor(1).center_tile, m.anchor(2).center_tile,
                               m.anchor(3).center_tile, m.anchor(4).center_tile};
  oracle::Presence who{{1, 2, 3, 4}, {0, 0, 0, 0}};
  bool differed = false;
  for (int t = 0; t < p.episode_length && !differed; ++t) {
    differed = step_teleport(s, cells).events.broke != q.step(who).broke;
  }
  EXPECT_TRUE(differed);
}

}  // namespace
}  // namespace supplychain
