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
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "supplychain/layout.hpp"

namespace supplychain {

/// Agent actions. The integer values are the wire encoding used in logs and
/// bindings; the four moves follow kNeighborOffsets.
enum class Action : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kWait = 4 };

inline constexpr int kNumActions = 5;

inline std::string_view action_name(Action a) {
  switch (a) {
    case Action::kUp: return "up";
    case Action::kDown: return "down";
    case Action::kLeft: return "left";
    case Action::kRight: return "right";
    case Action::kWait: return "wait";
  }
  return "?";
}

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Shortest-path helper over agent-walkable cells. Center and repair tiles
/// are treated as impassable unless they are the destination, so routed
/// agents never trigger repairs or block stations by passing through.
/// Fields for every anchor tile are precomputed; the object is immutable
/// afterwards and safe to share between threads.
class Navigator {
 public:
  Navigator() = default;

  explicit Navigator(const TileMap& m) : map_(&m) {
    for (const CenterAnchor& a : m.anchors) {
      for (int cell : {a.center_tile, a.repair_tile}) {
        if (cell >= 0 && cell < m.size() && m.is_walkable(cell)) {
          fields_.emplace(cell, compute_field(cell, {}));
        }
      }
    }
  }

  bool passable(int cell, int target) const {
    if (cell == target) return true;
    const Tile t = map_->at(cell);
    return t == Tile::kFloor;
  }

  /// BFS distance from every cell to `target` through passable cells.
  /// Cells in `blocked` (other than the target) are excluded.
  std::vector<int> compute_field(int target, std::span<const int> blocked) const {
    const TileMap& m = *map_;
    std::vector<int> dist(m.size(), kUnreachable);
    std::vector<char> is_blocked(m.size(), 0);
    for (int b : blocked) {
      if (b >= 0 && b != target) is_blocked[b] = 1;
    }
    std::vector<int> queue{target};
    dist[target] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int c = queue[head];
      for (int dir = 0; dir < 4; ++dir) {
        const int nb = m.neighbor(c, dir);
        if (nb < 0 || dist[nb] != kUnreachable || is_blocked[nb] || !passable(nb, target)) continue;
        dist[nb] = dist[c] + 1;
        queue.push_back(nb);
      }
    }
    return dist;
  }

  const std::vector<int>& field(int target) const {
    auto it = fields_.find(target);
    if (it == fields_.end()) {
      fail(ErrorCode::kNoPath, "no precomputed field for cell " + std::to_string(target));
    }
    return it->second;
  }

  /// Steps needed to stand on `target` starting at `from`. The start cell
  /// itself need not be passable (an agent may stand on a repair tile).
  int distance(int from, int target) const {
    if (from == target) return 0;
    const auto& f = field(target);
    int best = kUnreachable;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = map_->neighbor(from, dir);
      if (nb >= 0 && f[nb] != kUnreachable) best = std::min(best, f[nb] + 1);
    }
    return best;
  }

  /// First move along a shortest path from `from` to `target`. Ties go to
  /// the first direction in up/down/left/right order. When every shortest
  /// next cell is held by another agent, re-plans around the occupied cells
  /// and waits if that fails too.
  Action step_toward(int from, int target, std::span<const int> occupied = {}) const {
    if (from == target) return Action::kWait;
    const auto& f = field(target);
    int best = kUnreachable;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = map_->neighbor(from, dir);
      if (nb >= 0 && f[nb] < best) best = f[nb];
    }
    if (best == kUnreachable) {
      fail(ErrorCode::kNoPath, "cell " + std::to_string(target) + " unreachable from " +
                                   std::to_string(from));
    }
    auto is_occupied = [&](int cell) {
      return std::find(occupied.begin(), occupied.end(), cell) != occupied.end();
    };
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = map_->neighbor(from, dir);
      if (nb >= 0 && f[nb] == best && !is_occupied(nb)) return static_cast<Action>(dir);
    }
    const auto detour = compute_field(target, occupied);
    int alt = kUnreachable;
    int alt_dir = -1;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = map_->neighbor(from, dir);
      if (nb >= 0 && detour[nb] < alt && !is_occupied(nb)) {
        alt = detour[nb];
        alt_dir = dir;
      }
    }
    return alt_dir < 0 ? Action::kWait : static_cast<Action>(alt_dir);
  }

 private:
  const TileMap* map_ = nullptr;
  std::map<int, std::vector<int>> fields_;
};

}  // namespace supplychain
