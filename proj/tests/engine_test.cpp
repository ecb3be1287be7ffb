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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "supplychain/engine.hpp"
#include "supplychain/episode.hpp"
#include "supplychain/policies.hpp"
#include "supplychain/scenario.hpp"

namespace supplychain {
namespace {

const std::vector<int> kIdentity{1, 2, 3, 4};

std::shared_ptr<const Scene> circular() {
  static auto scene = Scene::generate(make_chain(4), LayoutStyle::kCircular, 2);
  return scene;
}

std::shared_ptr<const Scene> linear(int n, int d) {
  return Scene::generate(make_chain(n), LayoutStyle::kLinear, d);
}

EnvParams quiet_params() {
  EnvParams p;
  p.spawn_prob = 0.0;
  return p;
}

/// Cells where agents stand when they should not matter: distinct floor
/// cells away from every station.
std::vector<int> parking(const TileMap& m, int count) {
  std::vector<int> out;
  for (int c = 0; c < m.size() && static_cast<int>(out.size()) < count; ++c) {
    if (m.at(c) != Tile::kFloor) continue;
    bool near_station = false;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = m.neighbor(c, dir);
      if (nb >= 0 && (m.at(nb) == Tile::kCenter || m.at(nb) == Tile::kRepair)) near_station = true;
    }
    if (!near_station) out.push_back(c);
  }
  return out;
}

std::uint64_t seed_with_break_roll(int step, int center, bool below) {
  for (std::uint64_t seed = 0;; ++seed) {
    const double u = keyed_uniform(seed, Stream::kBreak, step, center);
    if ((u < 0.25) == below) return seed;
  }
}

// ---------------------------------------------------------------------------
// init_episode and is_terminal

TEST(InitEpisode, PlacesAgentsOnFloorAndStartsEmpty) {
  const WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 7);
  EXPECT_EQ(s.num_slots(), 4);
  EXPECT_EQ(s.units_in_flight(), 0);
  EXPECT_EQ(s.step, 0);
  for (int c = 1; c <= 4; ++c) EXPECT_FALSE(s.is_broken(c));
  std::set<int> cells;
  for (const auto& a : s.agents) {
    EXPECT_EQ(s.map().at(a.cell), Tile::kFloor);
    cells.insert(a.cell);
  }
  EXPECT_EQ(cells.size(), 4u);
}

TEST(InitEpisode, SpawnCellIsNearestFloorToOwnCenter) {
  const WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 7);
  for (const auto& a : s.agents) {
    EXPECT_LE(circular()->nav().distance(a.cell, s.map().anchor(a.center).center_tile), 2);
  }
}

TEST(InitEpisode, RejectsNonBijectiveAssignment) {
  for (std::vector<int> bad : {std::vector<int>{1, 1, 3, 4}, {1, 2, 3}, {0, 2, 3, 4}, {1, 2, 3, 5}}) {
    try {
      init_episode(circular(), bad, EnvParams{}, 7);
      ADD_FAILURE() << "expected BadAssignment";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBadAssignment);
    }
  }
}

TEST(InitEpisode, IsDeterministic) {
  EXPECT_EQ(init_episode(circular(), kIdentity, EnvParams{}, 7),
            init_episode(circular(), kIdentity, EnvParams{}, 7));
}

TEST(Scene, RejectsMapOfAnotherTopology) {
  try {
    Scene::make(make_chain(3), generate_layout(make_chain(4), LayoutStyle::kLinear, 2));
    ADD_FAILURE() << "expected MapTopologyMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMapTopologyMismatch);
  }
}

TEST(IsTerminal, ComparesStepWithEpisodeLength) {
  WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 1);
  EXPECT_FALSE(is_terminal(s));
  s.step = 999;
  EXPECT_FALSE(is_terminal(s));
  s.step = 1000;
  EXPECT_TRUE(is_terminal(s));
  const std::vector<Action> wait(4, Action::kWait);
  try {
    step(s, wait);
    ADD_FAILURE() << "expected EpisodeOver";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEpisodeOver);
  }
}

// ---------------------------------------------------------------------------
// Hand-traced steps

TEST(Step, TwoAgentRepairCreditsTheHelper) {
  WorldState s = init_episode(circular(), kIdentity, quiet_params(), 3);
  const TileMap& m = s.map();
  s.broken[0] = 1;
  const auto park = parking(m, 4);
  const std::vector<int> cells{m.anchor(1).center_tile, m.anchor(1).repair_tile, park[2], park[3]};
  const StepResult r = step_teleport(s, cells);
  ASSERT_EQ(r.events.repaired.size(), 1u);
  EXPECT_EQ(r.events.repaired[0], (CareEvent{2, 1}));
  EXPECT_FALSE(s.is_broken(1));
}

TEST(Step, RepairByTwoHelpersCreditsBoth) {
  WorldState s = init_episode(circular(), kIdentity, quiet_params(), 3);
  const TileMap& m = s.map();
  s.broken[0] = 1;
  const auto park = parking(m, 4);
  const std::vector<int> cells{park[0], m.anchor(1).repair_tile, m.anchor(1).center_tile, park[3]};
  const StepResult r = step_teleport(s, cells);
  EXPECT_EQ(r.events.repaired, (std::vector<CareEvent>{{2, 1}, {3, 1}}));
  EXPECT_FALSE(s.is_broken(1));
}

TEST(Step, OneAgentCannotRepair) {
  WorldState s = init_episode(circular(), kIdentity, quiet_params(), 3);
  const TileMap& m = s.map();
  s.broken[0] = 1;
  const auto park = parking(m, 4);
  const std::vector<int> cells{m.anchor(1).center_tile, park[1], park[2], park[3]};
  const StepResult r = step_teleport(s, cells);
  EXPECT_TRUE(r.events.repaired.empty());
  EXPECT_TRUE(s.is_broken(1));
}

TEST(Step, ProcessingPaysOwnerThenRollsBreakage) {
  for (bool breaks : {true, false}) {
    WorldState s = init_episode(circular(), kIdentity, quiet_params(), seed_with_break_roll(0, 1, breaks));
    const TileMap& m = s.map();
    s.units[m.anchor(1).processing] = 1;
    const auto park = parking(m, 4);
    const std::vector<int> cells{m.anchor(1).center_tile, park[1], park[2], park[3]};
    const StepResult r = step_teleport(s, cells);
    EXPECT_EQ(r.events.processed, std::vector<int>{1});
    EXPECT_EQ(r.rewards, (std::vector<int>{1, 0, 0, 0}));
    EXPECT_EQ(r.events.broke, breaks ? std::vector<int>{1} : std::vector<int>{});
    EXPECT_EQ(s.is_broken(1), breaks);
    EXPECT_EQ(s.units[m.anchor(1).processing], 0);
    EXPECT_EQ(s.units[m.successors[m.anchor(1).processing][0]], 1);
  }
}

TEST(Step, NoProcessingWithoutOwnerOrWhileBroken) {
  WorldState s = init_episode(circular(), kIdentity, quiet_params(), 5);
  const TileMap& m = s.map();
  const auto park = parking(m, 4);
  s.units[m.anchor(1).processing] = 1;
  // Another agent on center 1's tile does not operate it.
  StepResult r = step_teleport(s, std::vector<int>{park[0], m.anchor(1).center_tile, park[2], park[3]});
  EXPECT_TRUE(r.events.processed.empty());
  EXPECT_EQ(s.units[m.anchor(1).processing], 1);
  s.broken[0] = 1;
  r = step_teleport(s, std::vector<int>{m.anchor(1).center_tile, park[1], park[2], park[3]});
  EXPECT_TRUE(r.events.processed.empty());
  EXPECT_EQ(s.units[m.anchor(1).processing], 1);
}

TEST(Step, UnitBehindAHeldUnitIsDiscarded) {
  WorldState s = init_episode(linear(2, 2), std::vector<int>{1, 2}, quiet_params(), 5);
  const TileMap& m = s.map();
  const int held = m.anchor(1).processing;
  const int behind = m.predecessors[held][0];
  s.units[held] = 1;
  s.units[behind] = 1;
  const auto park = parking(m, 2);
  const StepResult r = step_teleport(s, park);
  EXPECT_EQ(r.events.discarded, 1);
  EXPECT_EQ(s.units[held], 1);
  EXPECT_EQ(s.units[behind], 0);
  EXPECT_EQ(s.units_in_flight(), 1);
}

TEST(Step, ConsecutiveFreeUnitsAdvanceTogether) {
  WorldState s = init_episode(linear(2, 4), std::vector<int>{1, 2}, quiet_params(), 5);
  const TileMap& m = s.map();
  const int a = m.successors[m.sources[0]][0];
  const int b = m.successors[a][0];
  s.units[a] = 1;
  s.units[b] = 1;
  const StepResult r = step_teleport(s, parking(m, 2));
  EXPECT_EQ(r.events.discarded, 0);
  EXPECT_EQ(s.units[b], 1);
  EXPECT_EQ(s.units[m.successors[b][0]], 1);
  EXPECT_EQ(s.units[a], 0);
}

TEST(Step, UnitsAtTheSinkLeaveAndCount) {
  WorldState s = init_episode(linear(2, 2), std::vector<int>{1, 2}, quiet_params(), 5);
  const TileMap& m = s.map();
  s.units[m.sinks[0]] = 1;
  s.units[m.predecessors[m.sinks[0]][0]] = 0;
  const StepResult r = step_teleport(s, parking(m, 2));
  EXPECT_EQ(r.events.sank, 1);
  EXPECT_EQ(s.sank, 1);
  EXPECT_EQ(s.units_in_flight(), 0);
}

TEST(Step, MergeAdmitsOneUnitAndDiscardsTheOther) {
  auto scene = Scene::generate(topology_preset("env3", 4), LayoutStyle::kBranched, 3);
  WorldState s = init_episode(scene, kIdentity, quiet_params(), 9);
  const TileMap& m = s.map();
  ASSERT_EQ(m.merge_cells.size(), 1u);
  const int merge = m.merge_cells[0];
  for (int p : m.predecessors[merge]) s.units[p] = 1;
  const StepResult r = step_teleport(s, parking(m, 4));
  EXPECT_EQ(r.events.discarded, 1);
  EXPECT_EQ(s.units[merge], 1);
  EXPECT_EQ(s.units_in_flight(), 1);
}

TEST(Step, BranchSplitsUnitsEvenly) {
  auto scene = Scene::generate(topology_preset("env1", 4), LayoutStyle::kBranched, 3);
  EnvParams p;
  p.break_prob = 0.0;
  p.spawn_prob = 0.2;
  p.episode_length = 20000;
  WorldState s = init_episode(scene, kIdentity, p, 21);
  const TileMap& m = s.map();
  const std::vector<int> cells{m.anchor(1).center_tile, m.anchor(2).center_tile,
                               m.anchor(3).center_tile, m.anchor(4).center_tile};
  long long to2 = 0, to3 = 0;
  while (!is_terminal(s)) {
    const StepResult r = step_teleport(s, cells);
    for (int c : r.events.processed) {
      if (c == 2) ++to2;
      if (c == 3) ++to3;
    }
  }
  const double n = static_cast<double>(to2 + to3);
  ASSERT_GT(n, 1000.0);
  EXPECT_LE(std::abs(to2 / n - 0.5), 3.0 * 0.5 / std::sqrt(n));
}

TEST(Step, SpawnsWithCertaintyAtProbabilityOne) {
  EnvParams p = quiet_params();
  p.spawn_prob = 1.0;
  p.episode_length = 50;
  WorldState s = init_episode(circular(), kIdentity, p, 1);
  const auto park = parking(s.map(), 4);
  while (!is_terminal(s)) EXPECT_EQ(step_teleport(s, park).events.spawned_total(), 1);
}

TEST(Step, SelfRepairFollowsRepairTime) {
  EnvParams p = quiet_params();
  p.repair_time = 10;
  p.episode_length = 100000;
  WorldState s = init_episode(circular(), kIdentity, p, 4);
  const auto park = parking(s.map(), 4);
  long long broken_steps = 0, repairs = 0;
  while (!is_terminal(s)) {
    s.broken[0] = 1;
    ++broken_steps;
    repairs += static_cast<long long>(step_teleport(s, park).events.self_repaired.size());
  }
  const double rate = static_cast<double>(repairs) / static_cast<double>(broken_steps);
  EXPECT_NEAR(rate, 0.1, 3.0 * std::sqrt(0.1 * 0.9 / broken_steps));
}

// ---------------------------------------------------------------------------
// Agent movement

struct MoveFixture {
  WorldState s;
  int left = -1;  // floor cell with floor two steps to its right
};

MoveFixture open_floor() {
  MoveFixture f{init_episode(circular(), kIdentity, quiet_params(), 0)};
  const TileMap& m = f.s.map();
  for (int c = 0; c < m.size(); ++c) {
    const int mid = m.neighbor(c, 3);
    const int right = mid >= 0 ? m.neighbor(mid, 3) : -1;
    if (m.at(c) == Tile::kFloor && mid >= 0 && m.at(mid) == Tile::kFloor && right >= 0 &&
        m.at(right) == Tile::kFloor) {
      f.left = c;
      break;
    }
  }
  return f;
}

TEST(Move, ContestedCellGoesToExactlyOneAgentAtRandom) {
  int left_wins = 0, right_wins = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    MoveFixture f = open_floor();
    f.s.seed = seed;
    const TileMap& m = f.s.map();
    const int mid = m.neighbor(f.left, 3);
    const int right = m.neighbor(mid, 3);
    const auto park = parking(m, 6);
    std::vector<int> others;
    for (int c : park) {
      if (c != f.left && c != mid && c != right) others.push_back(c);
    }
    f.s.agents[0].cell = f.left;
    f.s.agents[1].cell = right;
    f.s.agents[2].cell = others[0];
    f.s.agents[3].cell = others[1];
    step(f.s, std::vector<Action>{Action::kRight, Action::kLeft, Action::kWait, Action::kWait});
    const bool l = f.s.agents[0].cell == mid;
    const bool r = f.s.agents[1].cell == mid;
    ASSERT_NE(l, r);
    EXPECT_EQ(f.s.agents[0].cell, l ? mid : f.left);
    EXPECT_EQ(f.s.agents[1].cell, r ? mid : right);
    left_wins += l;
    right_wins += r;
  }
  EXPECT_GT(left_wins, 10);
  EXPECT_GT(right_wins, 10);
}

TEST(Move, SwapsAndMovesIntoStandingAgentsAreBlocked) {
  MoveFixture f = open_floor();
  const TileMap& m = f.s.map();
  const int mid = m.neighbor(f.left, 3);
  const auto park = parking(m, 6);
  std::vector<int> others;
  for (int c : park) {
    if (c != f.left && c != mid) others.push_back(c);
  }
  f.s.agents[0].cell = f.left;
  f.s.agents[1].cell = mid;
  f.s.agents[2].cell = others[0];
  f.s.agents[3].cell = others[1];
  step(f.s, std::vector<Action>{Action::kRight, Action::kLeft, Action::kWait, Action::kWait});
  EXPECT_EQ(f.s.agents[0].cell, f.left);
  EXPECT_EQ(f.s.agents[1].cell, mid);
  step(f.s, std::vector<Action>{Action::kRight, Action::kWait, Action::kWait, Action::kWait});
  EXPECT_EQ(f.s.agents[0].cell, f.left);
}

TEST(Move, FollowingAnAgentThatMovesAwayIsAllowed) {
  MoveFixture f = open_floor();
  const TileMap& m = f.s.map();
  const int mid = m.neighbor(f.left, 3);
  const int right = m.neighbor(mid, 3);
  const auto park = parking(m, 6);
  std::vector<int> others;
  for (int c : park) {
    if (c != f.left && c != mid && c != right) others.push_back(c);
  }
  f.s.agents[0].cell = f.left;
  f.s.agents[1].cell = mid;
  f.s.agents[2].cell = others[0];
  f.s.agents[3].cell = others[1];
  step(f.s, std::vector<Action>{Action::kRight, Action::kRight, Action::kWait, Action::kWait});
  EXPECT_EQ(f.s.agents[0].cell, mid);
  EXPECT_EQ(f.s.agents[1].cell, right);
}

TEST(Move, WallsAndChainCellsAreNoOps) {
  WorldState s = init_episode(circular(), kIdentity, quiet_params(), 0);
  const TileMap& m = s.map();
  // Stand on center 1's tile and try to step onto its processing cell.
  const int ct = m.anchor(1).center_tile;
  int dir_to_chain = -1;
  for (int dir = 0; dir < 4; ++dir) {
    if (m.neighbor(ct, dir) == m.anchor(1).processing) dir_to_chain = dir;
  }
  ASSERT_GE(dir_to_chain, 0);
  s.agents[0].cell = ct;
  std::vector<Action> a(4, Action::kWait);
  a[0] = static_cast<Action>(dir_to_chain);
  step(s, a);
  EXPECT_EQ(s.agents[0].cell, ct);
}

TEST(Move, RejectsOutOfRangeActions) {
  EXPECT_THROW(action_from_int(5), Error);
  EXPECT_THROW(action_from_int(-1), Error);
  EXPECT_EQ(action_from_int(4), Action::kWait);
}

// ---------------------------------------------------------------------------
// Observations

Rgb pixel(const Observation& o, int row, int col) {
  const int b = (row * kObsSize + col) * kObsChannels;
  return {o[b], o[b + 1], o[b + 2]};
}

TEST(Observe, CenterPixelIsAlwaysSelf) {
  WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 2);
  RandomPolicy rp;
  for (int t = 0; t < 200; ++t) {
    std::vector<Action> a;
    for (int k = 0; k < 4; ++k) a.push_back(rp.act(s, k));
    step(s, a);
    for (int k = 0; k < 4; ++k) EXPECT_EQ(pixel(observe(s, k), 6, 6), colors::kSelf);
  }
}

TEST(Observe, OutOfBoundsIsWallColored) {
  WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 2);
  const TileMap& m = s.map();
  s.agents[0].cell = m.index(2, 2);
  ASSERT_EQ(m.at(s.agents[0].cell), Tile::kFloor);
  const Observation o = observe(s, 0);
  for (int row = 0; row < kObsSize; ++row) {
    for (int col = 0; col < 4; ++col) EXPECT_EQ(pixel(o, row, col), colors::kWall);
  }
  for (int col = 0; col < kObsSize; ++col) EXPECT_EQ(pixel(o, 0, col), colors::kWall);
}

TEST(Observe, DistantUnitsDoNotChangeTheView) {
  const auto scene = linear(4, 7);
  WorldState a = init_episode(scene, kIdentity, EnvParams{}, 2);
  WorldState b = a;
  b.units[b.map().sinks[0]] = 1;  // far to the right of agent 1
  EXPECT_EQ(observe(a, 0), observe(b, 0));
  EXPECT_NE(observe(a, 3), observe(b, 3));
}

TEST(Observe, HighlightsOwnStationsAndOtherAgents) {
  WorldState s = init_episode(circular(), kIdentity, EnvParams{}, 2);
  const TileMap& m = s.map();
  const auto& a1 = m.anchor(1);
  s.agents[0].cell = a1.repair_tile;
  s.agents[1].cell = m.neighbor(a1.repair_tile, 1);
  ASSERT_EQ(m.at(s.agents[1].cell), Tile::kFloor);
  s.broken[0] = 1;
  const Observation mine = observe(s, 0);
  const int dx = m.x_of(a1.center_tile) - m.x_of(a1.repair_tile);
  const int dy = m.y_of(a1.center_tile) - m.y_of(a1.repair_tile);
  EXPECT_EQ(pixel(mine, 6 + dy, 6 + dx), colors::kOwnCenterTileBroken);
  EXPECT_EQ(pixel(mine, 7, 6), colors::kOtherAgent);
  const Observation theirs = observe(s, 1);
  EXPECT_EQ(pixel(theirs, 5 + dy, 6 + dx), colors::kCenterTileBroken);
  EXPECT_EQ(pixel(theirs, 5, 6), colors::kOtherAgent);
}

// ---------------------------------------------------------------------------
// Whole episodes

EpisodeLog run_named(std::shared_ptr<const Scene> scene, const std::vector<std::string>& names,
                     const EnvParams& p, std::uint64_t seed, WorldState* final_state = nullptr) {
  std::vector<std::unique_ptr<Policy>> owned;
  std::vector<Policy*> ptrs;
  for (const auto& n : names) {
    owned.push_back(make_scripted_policy(n));
    ptrs.push_back(owned.back().get());
  }
  EpisodeSetup setup;
  setup.scene = std::move(scene);
  setup.assignment.resize(names.size());
  std::iota(setup.assignment.begin(), setup.assignment.end(), 1);
  setup.params = p;
  setup.seed = seed;
  return run_episode(setup, ptrs, final_state);
}

TEST(RunEpisode, SelfishAgentsNeverRepair) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EpisodeLog log = run_named(circular(), {"selfish", "selfish", "selfish", "selfish"},
                                     EnvParams{}, seed);
    for (const auto& r : log.steps) EXPECT_TRUE(r.events.repaired.empty());
  }
}

TEST(RunEpisode, WaitingAgentsEarnNothingWhileUnitsKeepArriving) {
  const EpisodeLog log = run_named(circular(), {"wait", "wait", "wait", "wait"}, EnvParams{}, 12);
  long long spawned = 0;
  for (const auto& r : log.steps) {
    for (int x : r.rewards) EXPECT_EQ(x, 0);
    spawned += r.events.spawned_total();
  }
  const double mean = 0.1 * 1000, sd = std::sqrt(1000 * 0.1 * 0.9);
  EXPECT_LE(std::abs(spawned - mean), 3 * sd);
}

TEST(RunEpisode, IsByteIdenticalForAFixedSeed) {
  const std::vector<std::string> names{"reciprocal", "carer", "random", "selfish"};
  const std::string a = log_to_string(run_named(circular(), names, EnvParams{}, 77));
  const std::string b = log_to_string(run_named(circular(), names, EnvParams{}, 77));
  const std::string c = log_to_string(run_named(circular(), names, EnvParams{}, 78));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

// Conservation and causality over randomized episodes on every map family.
TEST(EngineProperty, ConservationAndCausalityUnderRandomPlay) {
  std::vector<std::shared_ptr<const Scene>> scenes{circular(), linear(4, 2), linear(3, 5)};
  for (const char* env : {"env1", "env2", "env3"}) {
    scenes.push_back(Scene::generate(topology_preset(env, 4), LayoutStyle::kBranched, 3));
  }
  int episodes = 0;
  for (const auto& scene : scenes) {
    const int n = scene->topology().num_centers();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      EnvParams p;
      p.spawn_prob = 0.1 + 0.05 * static_cast<double>(seed % 5);
      if (seed % 2) p.repair_time = 25;
      p.episode_length = 300;
      std::vector<int> assignment(n);
      std::iota(assignment.begin(), assignment.end(), 1);
      WorldState s = init_episode(scene, assignment, p, seed);
      RandomPolicy rp;
      while (!is_terminal(s)) {
        const WorldState before = s;
        std::vector<Action> a;
        for (int k = 0; k < n; ++k) a.push_back(rp.act(s, k));
        const StepResult r = step(s, a);
        int reward_sum = 0;
        for (int x : r.rewards) reward_sum += x;
        EXPECT_EQ(reward_sum, static_cast<int>(r.events.processed.size()));
        for (int c : r.events.processed) {
          const int slot = s.slot_at(s.map().anchor(c).center_tile);
          ASSERT_GE(slot, 0);
          EXPECT_EQ(s.agents[slot].center, c);
          EXPECT_EQ(r.rewards[slot], 1);
          EXPECT_TRUE(before.units[s.map().anchor(c).processing]);
          bool fixed_now = std::count(r.events.self_repaired.begin(), r.events.self_repaired.end(), c) > 0;
          for (const auto& e : r.events.repaired) fixed_now |= e.owner == c;
          EXPECT_TRUE(!before.is_broken(c) || fixed_now);
        }
        for (int c : r.events.broke) {
          EXPECT_EQ(std::count(r.events.processed.begin(), r.events.processed.end(), c), 1);
        }
        for (const auto& e : r.events.repaired) EXPECT_NE(e.carer, e.owner);
        std::set<int> agent_cells;
        for (const auto& ag : s.agents) {
          EXPECT_TRUE(s.map().is_walkable(ag.cell));
          agent_cells.insert(ag.cell);
        }
        EXPECT_EQ(static_cast<int>(agent_cells.size()), n);
        for (int c = 0; c < s.map().size(); ++c) {
          if (s.units[c]) EXPECT_TRUE(s.map().is_chain(c));
        }
      }
      EXPECT_EQ(s.spawned, s.sank + s.discarded + s.units_in_flight());
      ++episodes;
    }
  }
  EXPECT_EQ(episodes, 120);
}

// Selfish play with repairs impossible: processing per center until its
// first breakage is geometric with mean 1 / break_prob.
TEST(EngineProperty, UnitsBeforeFirstBreakageAreGeometric) {
  long long processed = 0, broke = 0;
  for (std::uint64_t seed = 0; seed < 1500; ++seed) {
    const EpisodeLog log = run_named(circular(), {"selfish", "selfish", "selfish", "selfish"},
                                     EnvParams{}, seed);
    for (const auto& r : log.steps) {
      processed += static_cast<long long>(r.events.processed.size());
      broke += static_cast<long long>(r.events.broke.size());
    }
  }
  const double mean = static_cast<double>(processed) / static_cast<double>(broke);
  // Standard error of the ratio estimator is about sqrt(1 - p) / p / sqrt(B).
  EXPECT_NEAR(mean, 4.0, 4.0 * std::sqrt(0.75) * 4.0 / std::sqrt(static_cast<double>(broke)));
}

}  // namespace
}  // namespace supplychain
