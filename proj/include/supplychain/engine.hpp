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

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "supplychain/error.hpp"
#include "supplychain/layout.hpp"
#include "supplychain/navigation.hpp"
#include "supplychain/rng.hpp"
#include "supplychain/topology.hpp"

namespace supplychain {

struct EnvParams {
  int episode_length = 1000;
  double spawn_prob = 0.10;
  double break_prob = 0.25;
  /// Self-repair happens with probability 1 / repair_time per step;
  /// nullopt is an infinite repair time (self-repair disabled).
  std::optional<int> repair_time;
  bool two_agent_repair = true;

  double self_repair_prob() const { return repair_time ? 1.0 / *repair_time : 0.0; }

  void validate() const {
    if (episode_length < 1) fail(ErrorCode::kInvalidParams, "episode_length must be positive");
    if (!(spawn_prob >= 0.0 && spawn_prob <= 1.0)) {
      fail(ErrorCode::kInvalidParams, "spawn_prob must lie in [0, 1]");
    }
    if (!(break_prob >= 0.0 && break_prob <= 1.0)) {
      fail(ErrorCode::kInvalidParams, "break_prob must lie in [0, 1]");
    }
    if (repair_time && *repair_time < 1) {
      fail(ErrorCode::kInvalidParams, "repair_time must be >= 1 or infinite");
    }
  }

  bool operator==(const EnvParams&) const = default;
};

/// Static part of an environment: topology, its grid and path planner.
/// Shared read-only between all episodes and threads.
class Scene {
 public:
  static std::shared_ptr<const Scene> make(Topology topology, TileMap map) {
    if (!realizes(map, topology)) {
      fail(ErrorCode::kMapTopologyMismatch, "tile map does not realize the topology");
    }
    return std::shared_ptr<const Scene>(new Scene(std::move(topology), std::move(map)));
  }

  static std::shared_ptr<const Scene> generate(Topology topology, LayoutStyle style, int spacing) {
    TileMap map = generate_layout(topology, style, spacing);
    return make(std::move(topology), std::move(map));
  }

  Scene(const Scene&) = delete;
  Scene& operator=(const Scene&) = delete;

  const Topology& topology() const { return topology_; }
  const TileMap& map() const { return map_; }
  const Navigator& nav() const { return nav_; }

 private:
  Scene(Topology topology, TileMap map)
      : topology_(std::move(topology)), map_(std::move(map)), nav_(map_) {}

  Topology topology_;
  TileMap map_;
  Navigator nav_;
};

struct AgentState {
  int agent_id = 0;  // population member, 1-based
  int center = 0;    // assigned center, 1-based
  int cell = -1;
  bool operator==(const AgentState&) const = default;
};

/// Repair of `owner`'s center in which the agent at center `carer` took part.
struct CareEvent {
  int carer = 0;
  int owner = 0;
  bool operator==(const CareEvent&) const = default;
};

/// Everything that happened in one step. Agents are identified by the center
/// they operate, so `processed` holds i for r_t^i = 1 and `repaired` holds
/// (i, j) for c_t^{ij} = 1.
struct StepEvents {
  std::vector<int> processed;
  std::vector<int> broke;
  std::vector<CareEvent> repaired;
  std::vector<int> self_repaired;
  std::vector<int> spawned;  // per source cell, 0 or 1
  int discarded = 0;
  int sank = 0;

  int spawned_total() const {
    int n = 0;
    for (int s : spawned) n += s;
    return n;
  }
  bool operator==(const StepEvents&) const = default;
};

struct StepResult {
  StepEvents events;
  std::vector<int> rewards;  // per slot
};

struct WorldState {
  std::shared_ptr<const Scene> scene;
  EnvParams params;
  std::uint64_t seed = 0;
  int step = 0;
  std::vector<std::uint8_t> units;   // per cell
  std::vector<std::uint8_t> broken;  // per center, index center - 1
  std::vector<AgentState> agents;    // per slot
  long long spawned = 0;
  long long sank = 0;
  long long discarded = 0;

  const TileMap& map() const { return scene->map(); }
  const Topology& topology() const { return scene->topology(); }
  int num_slots() const { return static_cast<int>(agents.size()); }
  bool is_broken(int center) const { return broken.at(center - 1) != 0; }

  int slot_at(int cell) const {
    for (int s = 0; s < num_slots(); ++s) {
      if (agents[s].cell == cell) return s;
    }
    return -1;
  }

  int slot_of_center(int center) const {
    for (int s = 0; s < num_slots(); ++s) {
      if (agents[s].center == center) return s;
    }
    return -1;
  }

  long long units_in_flight() const {
    long long n = 0;
    for (auto u : units) n += u;
    return n;
  }

  bool operator==(const WorldState& o) const {
    return scene == o.scene && params == o.params && seed == o.seed && step == o.step &&
           units == o.units && broken == o.broken && agents == o.agents &&
           spawned == o.spawned && sank == o.sank && discarded == o.discarded;
  }
};

inline Action action_from_int(int value) {
  if (value < 0 || value >= kNumActions) {
    fail(ErrorCode::kBadAction, "action " + std::to_string(value) + " outside [0, 5)");
  }
  return static_cast<Action>(value);
}

/// Spawn cell for an agent: the closest floor cell to its center tile
/// (walking distance), ties broken by the lowest cell index, skipping taken
/// cells.
inline int spawn_cell(const TileMap& m, int center, std::span<const int> taken) {
  const int start = m.anchor(center).center_tile;
  std::vector<int> dist(m.size(), kUnreachable);
  std::vector<int> queue{start};
  dist[start] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int c = queue[head];
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = m.neighbor(c, dir);
      if (nb < 0 || dist[nb] != kUnreachable || !m.is_walkable(nb)) continue;
      dist[nb] = dist[c] + 1;
      queue.push_back(nb);
    }
  }
  int best = -1;
  for (int c = 0; c < m.size(); ++c) {
    if (m.at(c) != Tile::kFloor || dist[c] == kUnreachable) continue;
    if (std::find(taken.begin(), taken.end(), c) != taken.end()) continue;
    if (best < 0 || dist[c] < dist[best]) best = c;
  }
  if (best < 0) fail(ErrorCode::kNoPath, "no free floor cell near center " + std::to_string(center));
  return best;
}

/// Fresh episode state. `assignment[slot]` is the center operated by that
/// slot and must be a bijection onto the centers. `agent_ids` defaults to
/// slot + 1.
inline WorldState init_episode(std::shared_ptr<const Scene> scene, std::span<const int> assignment,
                               const EnvParams& params, std::uint64_t seed,
                               std::span<const int> agent_ids = {}) {
  params.validate();
  const int n = scene->topology().num_centers();
  if (static_cast<int>(assignment.size()) != n) {
    fail(ErrorCode::kBadAssignment, "assignment must cover all " + std::to_string(n) + " centers");
  }
  std::vector<char> used(n + 1, 0);
  for (int c : assignment) {
    if (c < 1 || c > n || used[c]) {
      fail(ErrorCode::kBadAssignment, "assignment is not a bijection onto the centers");
    }
    used[c] = 1;
  }
  if (!agent_ids.empty() && agent_ids.size() != assignment.size()) {
    fail(ErrorCode::kBadAssignment, "one agent id per slot required");
  }

  WorldState s;
  s.scene = std::move(scene);
  s.params = params;
  s.seed = seed;
  s.units.assign(s.map().size(), 0);
  s.broken.assign(n, 0);
  std::vector<int> taken;
  for (std::size_t slot = 0; slot < assignment.size(); ++slot) {
    AgentState a;
    a.agent_id = agent_ids.empty() ? static_cast<int>(slot) + 1 : agent_ids[slot];
    a.center = assignment[slot];
    a.cell = spawn_cell(s.map(), a.center, taken);
    taken.push_back(a.cell);
    s.agents.push_back(a);
  }
  return s;
}

inline bool is_terminal(const WorldState& s) { return s.step >= s.params.episode_length; }

namespace detail {

// Phase 1: simultaneous moves. Contested cells go to a uniformly random
// contender; agents moving into a cell whose occupant stays are blocked, and
// head-on swaps are blocked.
inline void move_agents(WorldState& s, std::span<const Action> actions) {
  const TileMap& m = s.map();
  const int slots = s.num_slots();
  std::vector<int> target(slots);
  for (int a = 0; a < slots; ++a) {
    const int pos = s.agents[a].cell;
    target[a] = pos;
    if (actions[a] == Action::kWait) continue;
    const int nb = m.neighbor(pos, static_cast<int>(actions[a]));
    if (nb >= 0 && m.is_walkable(nb)) target[a] = nb;
  }
  for (int a = 0; a < slots; ++a) {
    if (target[a] == s.agents[a].cell) continue;
    std::vector<int> contenders;
    for (int b = 0; b < slots; ++b) {
      if (target[b] == target[a] && target[b] != s.agents[b].cell) contenders.push_back(b);
    }
    if (contenders.size() < 2) continue;
    const auto pick = keyed_index(s.seed, Stream::kMoveConflict, static_cast<std::uint64_t>(s.step),
                                  static_cast<std::uint64_t>(target[a]), contenders.size());
    for (std::size_t k = 0; k < contenders.size(); ++k) {
      if (k != pick) target[contenders[k]] = s.agents[contenders[k]].cell;
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < slots; ++a) {
      if (target[a] == s.agents[a].cell) continue;
      for (int b = 0; b < slots; ++b) {
        if (b == a || s.agents[b].cell != target[a]) continue;
        const bool stays = target[b] == s.agents[b].cell;
        const bool swaps = target[b] == s.agents[a].cell;
        if (stays || swaps) {
          target[a] = s.agents[a].cell;
          if (swaps) target[b] = s.agents[b].cell;
          changed = true;
        }
      }
    }
  }
  for (int a = 0; a < slots; ++a) s.agents[a].cell = target[a];
}

// Phases 2-7.
inline StepResult advance(WorldState& s) {
  const TileMap& m = s.map();
  const int n = s.topology().num_centers();
  const auto step = static_cast<std::uint64_t>(s.step);
  StepResult result;
  result.rewards.assign(s.num_slots(), 0);
  StepEvents& ev = result.events;

  // 2. Two-agent repair.
  if (s.params.two_agent_repair) {
    for (int c = 1; c <= n; ++c) {
      if (!s.broken[c - 1]) continue;
      const int on_center = s.slot_at(m.anchor(c).center_tile);
      const int on_repair = s.slot_at(m.anchor(c).repair_tile);
      if (on_center < 0 || on_repair < 0) continue;
      s.broken[c - 1] = 0;
      std::vector<int> carers;
      for (int slot : {on_center, on_repair}) {
        if (s.agents[slot].center != c) carers.push_back(s.agents[slot].center);
      }
      std::sort(carers.begin(), carers.end());
      for (int k : carers) ev.repaired.push_back({k, c});
    }
  }

  // 3. Self-repair.
  const double p_self = s.params.self_repair_prob();
  if (p_self > 0.0) {
    for (int c = 1; c <= n; ++c) {
      if (!s.broken[c - 1]) continue;
      if (keyed_uniform(s.seed, Stream::kSelfRepair, step, static_cast<std::uint64_t>(c)) < p_self) {
        s.broken[c - 1] = 0;
        ev.self_repaired.push_back(c);
      }
    }
  }

  // 4. Processing, followed by the breakage roll.
  std::vector<char> released(n + 1, 0);
  for (int c = 1; c <= n; ++c) {
    const CenterAnchor& a = m.anchor(c);
    if (!s.units[a.processing] || s.broken[c - 1]) continue;
    const int slot = s.slot_at(a.center_tile);
    if (slot < 0 || s.agents[slot].center != c) continue;
    released[c] = 1;
    result.rewards[slot] += 1;
    ev.processed.push_back(c);
    if (keyed_uniform(s.seed, Stream::kBreak, step, static_cast<std::uint64_t>(c)) <
        s.params.break_prob) {
      s.broken[c - 1] = 1;
      ev.broke.push_back(c);
    }
  }

  // 5. Unit flow, downstream first.
  std::vector<int> intent(m.size(), -1);
  for (int cell : m.flow_order) {
    if (!s.units[cell] || m.at(cell) == Tile::kSink) continue;
    if (m.at(cell) == Tile::kProcessing && !released[m.owner[cell]]) continue;
    const auto& succ = m.successors[cell];
    if (succ.size() == 1) {
      intent[cell] = succ[0];
    } else if (!succ.empty()) {
      intent[cell] = succ[keyed_index(s.seed, Stream::kBranch, step,
                                      static_cast<std::uint64_t>(cell), succ.size())];
    }
  }
  auto move_unit = [&](int from, int to) {
    s.units[from] = 0;
    if (s.units[to]) {
      ++ev.discarded;
    } else {
      s.units[to] = 1;
    }
    intent[from] = -1;
  };
  for (int cell : m.flow_order) {
    if (!s.units[cell]) continue;
    if (m.at(cell) == Tile::kSink) {
      s.units[cell] = 0;
      ++ev.sank;
      continue;
    }
    const int to = intent[cell];
    if (to < 0) continue;
    const auto& preds = m.predecessors[to];
    if (preds.size() > 1) {
      std::vector<int> contenders;
      for (int p : preds) {
        if (s.units[p] && intent[p] == to) contenders.push_back(p);
      }
      if (contenders.size() > 1) {
        std::sort(contenders.begin(), contenders.end());
        const auto pick = keyed_index(s.seed, Stream::kMerge, step, static_cast<std::uint64_t>(to),
                                      contenders.size());
        move_unit(contenders[pick], to);
        for (std::size_t k = 0; k < contenders.size(); ++k) {
          if (k != pick) move_unit(contenders[k], to);
        }
        continue;
      }
    }
    move_unit(cell, to);
  }

  // 6. Spawning.
  ev.spawned.assign(m.sources.size(), 0);
  for (std::size_t i = 0; i < m.sources.size(); ++i) {
    const int src = m.sources[i];
    if (keyed_uniform(s.seed, Stream::kSpawn, step, i) < s.params.spawn_prob && !s.units[src]) {
      s.units[src] = 1;
      ev.spawned[i] = 1;
    }
  }

  // 7. Bookkeeping.
  s.spawned += ev.spawned_total();
  s.sank += ev.sank;
  s.discarded += ev.discarded;
  ++s.step;
  return result;
}

}  // namespace detail

/// Advances the world one step under the joint action (one per slot).
inline StepResult step(WorldState& s, std::span<const Action> actions) {
  if (is_terminal(s)) fail(ErrorCode::kEpisodeOver, "episode already finished");
  if (static_cast<int>(actions.size()) != s.num_slots()) {
    fail(ErrorCode::kBadAction, "expected one action per slot");
  }
  for (Action a : actions) action_from_int(static_cast<int>(a));
  detail::move_agents(s, actions);
  return detail::advance(s);
}

/// Test mode with travel contracted to zero: agents are placed directly on
/// the given walkable cells (distinct), then the step proceeds from the
/// repair phase on. Used to compare the grid against gridless models.
inline StepResult step_teleport(WorldState& s, std::span<const int> cells) {
  if (is_terminal(s)) fail(ErrorCode::kEpisodeOver, "episode already finished");
  if (static_cast<int>(cells.size()) != s.num_slots()) {
    fail(ErrorCode::kBadAction, "expected one cell per slot");
  }
  for (std::size_t a = 0; a < cells.size(); ++a) {
    if (cells[a] < 0 || cells[a] >= s.map().size() || !s.map().is_walkable(cells[a])) {
      fail(ErrorCode::kBadAction, "teleport target is not walkable");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (cells[a] == cells[b]) fail(ErrorCode::kBadAction, "two agents teleported to one cell");
    }
  }
  for (std::size_t a = 0; a < cells.size(); ++a) s.agents[a].cell = cells[a];
  return detail::advance(s);
}

// ---------------------------------------------------------------------------
// Observations

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed color table for observations.
namespace colors {
inline constexpr Rgb kFloor{0, 0, 0};
inline constexpr Rgb kWall{128, 128, 128};
inline constexpr Rgb kPath{60, 60, 160};
inline constexpr Rgb kProcessing{0, 120, 255};
inline constexpr Rgb kCenterTile{255, 200, 0};
inline constexpr Rgb kCenterTileBroken{255, 0, 0};
inline constexpr Rgb kRepairTile{0, 200, 0};
inline constexpr Rgb kOwnCenterTile{255, 255, 0};
inline constexpr Rgb kOwnCenterTileBroken{255, 0, 128};
inline constexpr Rgb kOwnRepairTile{0, 255, 128};
inline constexpr Rgb kSource{200, 0, 200};
inline constexpr Rgb kSink{100, 0, 100};
inline constexpr Rgb kUnit{255, 128, 0};
inline constexpr Rgb kSelf{255, 255, 255};
inline constexpr Rgb kOtherAgent{0, 255, 255};
}  // namespace colors

inline constexpr int kObsSize = 13;
inline constexpr int kObsChannels = 3;
inline constexpr int kObsLength = kObsSize * kObsSize * kObsChannels;

/// Channel-last 13x13x3 image: value at (row, col, ch) is at
/// (row * 13 + col) * 3 + ch.
using Observation = std::array<std::uint8_t, kObsLength>;

enum class ObservationMode {
  kEgocentric,  // window centered on the agent
  kFullMap,     // window centered on the map
};

inline Rgb cell_color(const WorldState& s, int slot, int cell) {
  const TileMap& m = s.map();
  const int occupant = s.slot_at(cell);
  if (occupant == slot) return colors::kSelf;
  if (occupant >= 0) return colors::kOtherAgent;
  if (s.units[cell]) return colors::kUnit;
  const int own = s.agents[slot].center;
  switch (m.at(cell)) {
    case Tile::kFloor: return colors::kFloor;
    case Tile::kWall: return colors::kWall;
    case Tile::kPath: return colors::kPath;
    case Tile::kProcessing: return colors::kProcessing;
    case Tile::kCenter: {
      const int c = m.owner[cell];
      const bool broken = s.is_broken(c);
      if (c == own) return broken ? colors::kOwnCenterTileBroken : colors::kOwnCenterTile;
      return broken ? colors::kCenterTileBroken : colors::kCenterTile;
    }
    case Tile::kRepair:
      return m.owner[cell] == own ? colors::kOwnRepairTile : colors::kRepairTile;
    case Tile::kSource: return colors::kSource;
    case Tile::kSink: return colors::kSink;
  }
  return colors::kWall;
}

inline Observation observe(const WorldState& s, int slot,
                           ObservationMode mode = ObservationMode::kEgocentric) {
  const TileMap& m = s.map();
  int cx, cy;
  if (mode == ObservationMode::kEgocentric) {
    cx = m.x_of(s.agents.at(slot).cell);
    cy = m.y_of(s.agents.at(slot).cell);
  } else {
    cx = m.width / 2;
    cy = m.height / 2;
  }
  constexpr int kHalf = kObsSize / 2;
  Observation obs{};
  for (int r = 0; r < kObsSize; ++r) {
    for (int col = 0; col < kObsSize; ++col) {
      const int x = cx - kHalf + col;
      const int y = cy - kHalf + r;
      const Rgb rgb = m.in_bounds(x, y) ? cell_color(s, slot, m.index(x, y)) : colors::kWall;
      const int base = (r * kObsSize + col) * kObsChannels;
      obs[base] = rgb[0];
      obs[base + 1] = rgb[1];
      obs[base + 2] = rgb[2];
    }
  }
  return obs;
}

/// Text frame: tile glyphs overlaid with units ('o'), broken center tiles
/// ('!') and agents (digit of the center they operate).
inline std::string render_ascii(const WorldState& s) {
  const TileMap& m = s.map();
  std::string out;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const int c = m.index(x, y);
      char g = tile_glyph(m.at(c));
      if (m.at(c) == Tile::kCenter && s.is_broken(m.owner[c])) g = '!';
      if (s.units[c]) g = 'o';
      const int slot = s.slot_at(c);
      if (slot >= 0) {
        const int center = s.agents[slot].center;
        g = center < 10 ? static_cast<char>('0' + center) : '@';
      }
      out.push_back(g);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace supplychain
