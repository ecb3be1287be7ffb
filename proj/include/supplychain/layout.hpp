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

// Concrete grid realizations of a Topology.
//
// Tile legend (ASCII export/import):
//   '#' wall        '.' floor        '=' path          'P' processing cell
//   'C' center tile 'R' repair tile  'S' source        'X' sink
//
// Units live on chain cells (path, processing cell, source, sink); agents
// live on floor, center tiles and repair tiles. The two sets never overlap.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "supplychain/error.hpp"
#include "supplychain/topology.hpp"

namespace supplychain {

enum class Tile : std::uint8_t {
  kFloor,
  kWall,
  kPath,
  kProcessing,
  kCenter,
  kRepair,
  kSource,
  kSink,
};

inline char tile_glyph(Tile t) {
  switch (t) {
    case Tile::kFloor: return '.';
    case Tile::kWall: return '#';
    case Tile::kPath: return '=';
    case Tile::kProcessing: return 'P';
    case Tile::kCenter: return 'C';
    case Tile::kRepair: return 'R';
    case Tile::kSource: return 'S';
    case Tile::kSink: return 'X';
  }
  return '?';
}

inline std::optional<Tile> tile_from_glyph(char c) {
  switch (c) {
    case '.': return Tile::kFloor;
    case '#': return Tile::kWall;
    case '=': return Tile::kPath;
    case 'P': return Tile::kProcessing;
    case 'C': return Tile::kCenter;
    case 'R': return Tile::kRepair;
    case 'S': return Tile::kSource;
    case 'X': return Tile::kSink;
    default: return std::nullopt;
  }
}

inline bool is_chain_tile(Tile t) {
  return t == Tile::kPath || t == Tile::kProcessing || t == Tile::kSource || t == Tile::kSink;
}

inline bool is_walkable_tile(Tile t) {
  return t == Tile::kFloor || t == Tile::kCenter || t == Tile::kRepair;
}

enum class LayoutStyle { kCircular, kLinear, kBranched };

inline std::string_view layout_style_name(LayoutStyle s) {
  switch (s) {
    case LayoutStyle::kCircular: return "circular";
    case LayoutStyle::kLinear: return "linear";
    case LayoutStyle::kBranched: return "branched";
  }
  return "?";
}

inline std::optional<LayoutStyle> parse_layout_style(std::string_view name) {
  if (name == "circular") return LayoutStyle::kCircular;
  if (name == "linear") return LayoutStyle::kLinear;
  if (name == "branched") return LayoutStyle::kBranched;
  return std::nullopt;
}

/// Cells belonging to one processing center. -1 marks a missing cell.
struct CenterAnchor {
  int processing = -1;
  int center_tile = -1;
  int repair_tile = -1;
  bool operator==(const CenterAnchor&) const = default;
};

/// Orthogonal neighbor offsets in the canonical order up, down, left, right.
inline constexpr std::array<std::pair<int, int>, 4> kNeighborOffsets{
    {{0, -1}, {0, 1}, {-1, 0}, {1, 0}}};

struct TileMap {
  int width = 0;
  int height = 0;
  std::vector<Tile> tiles;
  /// Flow successors per cell; non-empty only on chain cells except sinks.
  std::vector<std::vector<int>> successors;
  /// anchors[c - 1] holds the cells of center c.
  std::vector<CenterAnchor> anchors;
  /// Source and sink cells. Spawn randomness is keyed by position in `sources`.
  std::vector<int> sources;
  std::vector<int> sinks;

  // Derived by finalize().
  std::vector<std::vector<int>> predecessors;
  std::vector<int> branch_cells;
  std::vector<int> merge_cells;
  /// Chain cells in downstream-first order (reverse topological order of the
  /// successor graph). Cells on a cycle are omitted.
  std::vector<int> flow_order;
  /// Center owning a processing cell, center tile or repair tile; 0 otherwise.
  std::vector<int> owner;

  int num_centers() const { return static_cast<int>(anchors.size()); }
  int size() const { return width * height; }
  int index(int x, int y) const { return y * width + x; }
  int x_of(int cell) const { return cell % width; }
  int y_of(int cell) const { return cell / width; }
  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  Tile at(int cell) const { return tiles[cell]; }
  bool is_chain(int cell) const { return is_chain_tile(tiles[cell]); }
  bool is_walkable(int cell) const { return is_walkable_tile(tiles[cell]); }

  const CenterAnchor& anchor(int center) const { return anchors.at(center - 1); }

  /// Neighbor of `cell` in direction `dir` (index into kNeighborOffsets),
  /// or -1 when it falls outside the map.
  int neighbor(int cell, int dir) const {
    const int nx = x_of(cell) + kNeighborOffsets[dir].first;
    const int ny = y_of(cell) + kNeighborOffsets[dir].second;
    return in_bounds(nx, ny) ? index(nx, ny) : -1;
  }

  bool adjacent(int a, int b) const {
    if (a < 0 || b < 0) return false;
    const int dx = std::abs(x_of(a) - x_of(b));
    const int dy = std::abs(y_of(a) - y_of(b));
    return dx + dy == 1;
  }

  void finalize() {
    const int n = size();
    successors.resize(n);
    predecessors.assign(n, {});
    for (int c = 0; c < n; ++c) {
      for (int s : successors[c]) {
        if (s >= 0 && s < n) predecessors[s].push_back(c);
      }
    }
    branch_cells.clear();
    merge_cells.clear();
    for (int c = 0; c < n; ++c) {
      if (successors[c].size() > 1) branch_cells.push_back(c);
      if (predecessors[c].size() > 1) merge_cells.push_back(c);
    }
    // Kahn on the reversed graph: cells with no successors come first.
    std::vector<int> outdeg(n, 0);
    std::vector<int> queue;
    for (int c = 0; c < n; ++c) {
      if (!is_chain(c)) continue;
      for (int s : successors[c]) {
        if (s >= 0 && s < n) ++outdeg[c];
      }
      if (outdeg[c] == 0) queue.push_back(c);
    }
    flow_order.clear();
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int c = queue[head];
      flow_order.push_back(c);
      for (int p : predecessors[c]) {
        if (--outdeg[p] == 0) queue.push_back(p);
      }
    }
    owner.assign(n, 0);
    for (int i = 0; i < num_centers(); ++i) {
      for (int cell : {anchors[i].processing, anchors[i].center_tile, anchors[i].repair_tile}) {
        if (cell >= 0 && cell < n) owner[cell] = i + 1;
      }
    }
  }

  bool operator==(const TileMap& o) const {
    return width == o.width && height == o.height && tiles == o.tiles &&
           successors == o.successors && anchors == o.anchors && sources == o.sources &&
           sinks == o.sinks;
  }
};

// ---------------------------------------------------------------------------
// Validation

enum class DiagnosticKind {
  kSizeMismatch,
  kMissingProcessingCell,
  kMissingCenterTile,
  kMissingRepairTile,
  kCenterTileNotAdjacent,
  kRepairTileNotAdjacent,
  kUnanchoredTile,
  kSuccessorOffChain,
  kNonAdjacentSuccessor,
  kTooManySuccessors,
  kMissingSource,
  kBadSourceOrSink,
  kCyclicFlow,
  kDisconnectedFlow,
};

inline std::string_view diagnostic_name(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::kSizeMismatch: return "SizeMismatch";
    case DiagnosticKind::kMissingProcessingCell: return "MissingProcessingCell";
    case DiagnosticKind::kMissingCenterTile: return "MissingCenterTile";
    case DiagnosticKind::kMissingRepairTile: return "MissingRepairTile";
    case DiagnosticKind::kCenterTileNotAdjacent: return "CenterTileNotAdjacent";
    case DiagnosticKind::kRepairTileNotAdjacent: return "RepairTileNotAdjacent";
    case DiagnosticKind::kUnanchoredTile: return "UnanchoredTile";
    case DiagnosticKind::kSuccessorOffChain: return "SuccessorOffChain";
    case DiagnosticKind::kNonAdjacentSuccessor: return "NonAdjacentSuccessor";
    case DiagnosticKind::kTooManySuccessors: return "TooManySuccessors";
    case DiagnosticKind::kMissingSource: return "MissingSource";
    case DiagnosticKind::kBadSourceOrSink: return "BadSourceOrSink";
    case DiagnosticKind::kCyclicFlow: return "CyclicFlow";
    case DiagnosticKind::kDisconnectedFlow: return "DisconnectedFlow";
  }
  return "?";
}

struct Diagnostic {
  DiagnosticKind kind;
  int center = 0;  // 0 when not center-specific
  int cell = -1;

  bool operator==(const Diagnostic&) const = default;

  std::string to_string() const {
    std::string s(diagnostic_name(kind));
    if (center > 0) s += "(center " + std::to_string(center) + ")";
    if (cell >= 0) s += "@" + std::to_string(cell);
    return s;
  }
};

/// Lists every violated TileMap invariant; empty when the map is valid.
inline std::vector<Diagnostic> validate_tilemap(const TileMap& m) {
  std::vector<Diagnostic> out;
  const int n = m.size();
  if (m.width <= 0 || m.height <= 0 || static_cast<int>(m.tiles.size()) != n ||
      static_cast<int>(m.successors.size()) != n) {
    out.push_back({DiagnosticKind::kSizeMismatch});
    return out;
  }
  auto valid_cell = [&](int c) { return c >= 0 && c < n; };

  std::vector<int> claimed(n, 0);
  for (int i = 0; i < m.num_centers(); ++i) {
    const int center = i + 1;
    const CenterAnchor& a = m.anchors[i];
    const bool has_proc = valid_cell(a.processing) && m.at(a.processing) == Tile::kProcessing;
    const bool has_ctile = valid_cell(a.center_tile) && m.at(a.center_tile) == Tile::kCenter;
    const bool has_rtile = valid_cell(a.repair_tile) && m.at(a.repair_tile) == Tile::kRepair;
    if (!has_proc) out.push_back({DiagnosticKind::kMissingProcessingCell, center, a.processing});
    if (!has_ctile) out.push_back({DiagnosticKind::kMissingCenterTile, center, a.center_tile});
    if (!has_rtile) out.push_back({DiagnosticKind::kMissingRepairTile, center, a.repair_tile});
    if (has_proc && has_ctile && !m.adjacent(a.processing, a.center_tile)) {
      out.push_back({DiagnosticKind::kCenterTileNotAdjacent, center, a.center_tile});
    }
    if (has_ctile && has_rtile && !m.adjacent(a.center_tile, a.repair_tile)) {
      out.push_back({DiagnosticKind::kRepairTileNotAdjacent, center, a.repair_tile});
    }
    for (int c : {a.processing, a.center_tile, a.repair_tile}) {
      if (valid_cell(c)) ++claimed[c];
    }
  }
  for (int c = 0; c < n; ++c) {
    const Tile t = m.at(c);
    const bool anchored_kind = t == Tile::kProcessing || t == Tile::kCenter || t == Tile::kRepair;
    if (anchored_kind && claimed[c] != 1) out.push_back({DiagnosticKind::kUnanchoredTile, 0, c});
  }

  for (int c = 0; c < n; ++c) {
    const auto& succ = m.successors[c];
    if (succ.empty()) continue;
    if (!m.is_chain(c)) {
      out.push_back({DiagnosticKind::kSuccessorOffChain, 0, c});
      continue;
    }
    if (succ.size() > 2) out.push_back({DiagnosticKind::kTooManySuccessors, 0, c});
    for (int s : succ) {
      if (!valid_cell(s) || !m.is_chain(s)) {
        out.push_back({DiagnosticKind::kSuccessorOffChain, 0, c});
      } else if (!m.adjacent(c, s)) {
        out.push_back({DiagnosticKind::kNonAdjacentSuccessor, 0, c});
      }
    }
  }

  if (m.sources.empty()) out.push_back({DiagnosticKind::kMissingSource});
  for (int s : m.sources) {
    if (!valid_cell(s) || m.at(s) != Tile::kSource) out.push_back({DiagnosticKind::kBadSourceOrSink, 0, s});
  }
  for (int s : m.sinks) {
    if (!valid_cell(s) || m.at(s) != Tile::kSink) out.push_back({DiagnosticKind::kBadSourceOrSink, 0, s});
  }
  for (int c = 0; c < n; ++c) {
    const Tile t = m.at(c);
    if (t == Tile::kSource && std::find(m.sources.begin(), m.sources.end(), c) == m.sources.end()) {
      out.push_back({DiagnosticKind::kBadSourceOrSink, 0, c});
    }
    if (t == Tile::kSink && std::find(m.sinks.begin(), m.sinks.end(), c) == m.sinks.end()) {
      out.push_back({DiagnosticKind::kBadSourceOrSink, 0, c});
    }
  }
  if (!out.empty()) return out;

  // Flow structure: acyclic, every chain cell on some source -> sink route.
  std::vector<std::vector<int>> pred(n);
  for (int c = 0; c < n; ++c) {
    for (int s : m.successors[c]) pred[s].push_back(c);
  }
  std::vector<int> outdeg(n, 0);
  std::vector<int> order;
  int chain_cells = 0;
  for (int c = 0; c < n; ++c) {
    if (!m.is_chain(c)) continue;
    ++chain_cells;
    outdeg[c] = static_cast<int>(m.successors[c].size());
    if (outdeg[c] == 0) order.push_back(c);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (int p : pred[order[head]]) {
      if (--outdeg[p] == 0) order.push_back(p);
    }
  }
  if (static_cast<int>(order.size()) != chain_cells) {
    out.push_back({DiagnosticKind::kCyclicFlow});
    return out;
  }

  auto sweep = [&](const std::vector<int>& seeds, const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack(seeds.begin(), seeds.end());
    for (int s : seeds) seen[s] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int nb : adj[c]) {
        if (!seen[nb]) {
          seen[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
    return seen;
  };
  const auto from_source = sweep(m.sources, m.successors);
  const auto to_sink = sweep(m.sinks, pred);
  for (int c = 0; c < n; ++c) {
    if (!m.is_chain(c)) continue;
    const bool dead_end = m.successors[c].empty() && m.at(c) != Tile::kSink;
    if (!from_source[c] || !to_sink[c] || dead_end) {
      out.push_back({DiagnosticKind::kDisconnectedFlow, m.owner.empty() ? 0 : m.owner[c], c});
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ASCII export / import

inline std::string to_ascii(const TileMap& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>((m.width + 1) * m.height));
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) out.push_back(tile_glyph(m.at(m.index(x, y))));
    out.push_back('\n');
  }
  return out;
}

/// Parses an ASCII map. Flow direction is recovered by walking outward from
/// each source: a chain cell's successors are its not-yet-visited chain
/// neighbors, and a sink is only entered from a cell with no other way to
/// continue. This recovers chains and branching trees whose parallel runs are
/// not adjacent; merges are not supported. Centers are numbered in the order
/// their processing cells are reached by the walk, then row-major for any
/// unreached ones. Missing center/repair tiles are left as -1 so that
/// validate_tilemap can report them.
inline TileMap parse_tilemap_ascii(std::string_view text) {
  std::vector<std::string> rows;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty()) fail(ErrorCode::kMapParse, "empty map");
  TileMap m;
  m.height = static_cast<int>(rows.size());
  m.width = static_cast<int>(rows[0].size());
  m.tiles.resize(static_cast<std::size_t>(m.width * m.height));
  for (int y = 0; y < m.height; ++y) {
    if (static_cast<int>(rows[y].size()) != m.width) {
      fail(ErrorCode::kMapParse, "row " + std::to_string(y + 1) + " has width " +
                                     std::to_string(rows[y].size()) + ", expected " +
                                     std::to_string(m.width));
    }
    for (int x = 0; x < m.width; ++x) {
      const auto tile = tile_from_glyph(rows[y][x]);
      if (!tile) {
        fail(ErrorCode::kMapParse, std::string("unknown glyph '") + rows[y][x] + "' at row " +
                                       std::to_string(y + 1) + ", column " + std::to_string(x + 1));
      }
      m.tiles[m.index(x, y)] = *tile;
    }
  }
  const int n = m.size();
  m.successors.assign(n, {});
  for (int c = 0; c < n; ++c) {
    if (m.at(c) == Tile::kSource) m.sources.push_back(c);
    if (m.at(c) == Tile::kSink) m.sinks.push_back(c);
  }

  std::vector<char> visited(n, 0);
  std::vector<int> processing_order;
  std::queue<int> frontier;
  for (int s : m.sources) {
    visited[s] = 1;
    frontier.push(s);
  }
  while (!frontier.empty()) {
    const int c = frontier.front();
    frontier.pop();
    if (m.at(c) == Tile::kProcessing) processing_order.push_back(c);
    if (m.at(c) == Tile::kSink) continue;
    std::vector<int> next;
    int sink_neighbor = -1;
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = m.neighbor(c, dir);
      if (nb < 0 || visited[nb] || !m.is_chain(nb) || m.at(nb) == Tile::kSource) continue;
      if (m.at(nb) == Tile::kSink) {
        if (sink_neighbor < 0) sink_neighbor = nb;
        continue;
      }
      next.push_back(nb);
    }
    if (next.empty() && sink_neighbor >= 0) next.push_back(sink_neighbor);
    for (int nb : next) {
      visited[nb] = 1;
      m.successors[c].push_back(nb);
      frontier.push(nb);
    }
  }
  for (int c = 0; c < n; ++c) {
    if (m.at(c) == Tile::kProcessing && !visited[c]) processing_order.push_back(c);
  }

  std::vector<char> used(n, 0);
  auto adjacent_of_kind = [&](int cell, Tile kind) {
    for (int dir = 0; dir < 4; ++dir) {
      const int nb = m.neighbor(cell, dir);
      if (nb >= 0 && m.at(nb) == kind && !used[nb]) return nb;
    }
    return -1;
  };
  for (int p : processing_order) {
    CenterAnchor a;
    a.processing = p;
    a.center_tile = adjacent_of_kind(p, Tile::kCenter);
    if (a.center_tile >= 0) {
      used[a.center_tile] = 1;
      a.repair_tile = adjacent_of_kind(a.center_tile, Tile::kRepair);
      if (a.repair_tile >= 0) used[a.repair_tile] = 1;
    }
    m.anchors.push_back(a);
  }
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

class MapPainter {
 public:
  MapPainter(int width, int height) {
    map_.width = width;
    map_.height = height;
    map_.tiles.assign(static_cast<std::size_t>(width * height), Tile::kFloor);
    map_.successors.assign(static_cast<std::size_t>(width * height), {});
    for (int x = 0; x < width; ++x) {
      map_.tiles[map_.index(x, 0)] = Tile::kWall;
      map_.tiles[map_.index(x, height - 1)] = Tile::kWall;
    }
    for (int y = 0; y < height; ++y) {
      map_.tiles[map_.index(0, y)] = Tile::kWall;
      map_.tiles[map_.index(width - 1, y)] = Tile::kWall;
    }
  }

  int cell(int x, int y) const {
    if (!map_.in_bounds(x, y)) {
      fail(ErrorCode::kStyleTopologyMismatch, "geometry leaves the map");
    }
    return map_.index(x, y);
  }

  int paint(int x, int y, Tile t) {
    const int c = cell(x, y);
    if (map_.tiles[c] != Tile::kFloor) {
      fail(ErrorCode::kStyleTopologyMismatch,
           "geometry collision at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    }
    map_.tiles[c] = t;
    return c;
  }

  void link(int from, int to) { map_.successors[from].push_back(to); }

  /// Lays path cells along axis-aligned waypoints. The first and last
  /// waypoints must already be painted; intermediate cells become path.
  void route(const std::vector<std::pair<int, int>>& pts) {
    int prev = cell(pts.front().first, pts.front().second);
    int x = pts.front().first;
    int y = pts.front().second;
    const int last = cell(pts.back().first, pts.back().second);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto [tx, ty] = pts[i];
      if (tx != x && ty != y) fail(ErrorCode::kStyleTopologyMismatch, "diagonal route segment");
      while (x != tx || y != ty) {
        x += (tx > x) - (tx < x);
        y += (ty > y) - (ty < y);
        const int c = cell(x, y);
        if (c != last) paint(x, y, Tile::kPath);
        link(prev, c);
        prev = c;
      }
    }
    if (prev != last) fail(ErrorCode::kStyleTopologyMismatch, "route does not reach its end");
  }

  TileMap& map() { return map_; }

 private:
  TileMap map_;
};

inline TileMap finish(TileMap m) {
  m.finalize();
  const auto diags = validate_tilemap(m);
  if (!diags.empty()) {
    fail(ErrorCode::kStyleTopologyMismatch,
         "generated map is invalid: " + diags.front().to_string());
  }
  return m;
}

// Ring of path cells around a 13x13 room; centers sit on the ring with their
// tiles pointing inward. The ring is open between the source and the sink.
inline TileMap circular_layout(const Topology& t) {
  constexpr int kRing = 11;  // ring side length in cells
  constexpr int kSide = kRing - 1;
  constexpr int kPerimeter = 4 * kSide;
  const int n = t.num_centers();

  std::vector<std::pair<int, int>> seq;
  for (int x = 1; x <= kRing; ++x) seq.emplace_back(x, 1);
  for (int y = 2; y <= kRing; ++y) seq.emplace_back(kRing, y);
  for (int x = kRing - 1; x >= 1; --x) seq.emplace_back(x, kRing);
  for (int y = kRing - 1; y >= 2; --y) seq.emplace_back(1, y);

  MapPainter p(kRing + 2, kRing + 2);
  std::vector<int> seq_cells;
  for (const auto& [x, y] : seq) seq_cells.push_back(p.cell(x, y));

  // Chain order of centers along the ring.
  std::vector<int> chain_order;
  for (int c : t.topological_order()) chain_order.push_back(c);

  std::vector<int> processing_at(kPerimeter, 0);
  auto& m = p.map();
  m.anchors.assign(n, {});
  int prev_idx = 0;
  for (int k = 0; k < n; ++k) {
    int idx = static_cast<int>((k + 0.5) * kPerimeter / n);
    if (idx % kSide == 0) ++idx;
    if (idx <= prev_idx || idx >= kPerimeter - 1) {
      fail(ErrorCode::kStyleTopologyMismatch, "too many centers for the circular ring");
    }
    prev_idx = idx;
    const auto [x, y] = seq[idx];
    int ix = 0, iy = 0;
    if (idx < kSide) iy = 1;
    else if (idx < 2 * kSide) ix = -1;
    else if (idx < 3 * kSide) iy = -1;
    else ix = 1;
    const int center = chain_order[k];
    CenterAnchor a;
    a.processing = p.paint(x, y, Tile::kProcessing);
    a.center_tile = p.paint(x + ix, y + iy, Tile::kCenter);
    a.repair_tile = p.paint(x + 2 * ix, y + 2 * iy, Tile::kRepair);
    m.anchors[center - 1] = a;
    processing_at[idx] = center;
  }
  for (int i = 0; i < kPerimeter; ++i) {
    const auto [x, y] = seq[i];
    if (i == 0) {
      p.paint(x, y, Tile::kSource);
    } else if (i == kPerimeter - 1) {
      p.paint(x, y, Tile::kSink);
    } else if (processing_at[i] == 0) {
      p.paint(x, y, Tile::kPath);
    }
    if (i + 1 < kPerimeter) p.link(seq_cells[i], seq_cells[i + 1]);
  }
  m.sources = {seq_cells.front()};
  m.sinks = {seq_cells.back()};
  return finish(std::move(m));
}

// Lane layout shared by the linear and branched styles. Flow runs left to
// right; each center's processing cell sits at column x0 + (depth + 1) * d on
// its lane row. Lane 0 keeps its tiles above the chain, lane 1 below, so no
// tiles end up inside the region enclosed by a branch/merge pair.
inline TileMap lane_layout(const Topology& t, int spacing) {
  const int n = t.num_centers();
  const auto& topo = t.topological_order();

  std::vector<int> depth(n + 1, 0);
  for (int c : topo) {
    for (int s : t.successors(c)) depth[s] = std::max(depth[s], depth[c] + 1);
  }

  std::vector<int> lane(n + 1, -1);
  int lanes = 0;
  for (int c : topo) {
    if (t.successors(c).size() > 2 || t.predecessors(c).size() > 2) {
      fail(ErrorCode::kStyleTopologyMismatch,
           "lane layouts support at most two branches or merges per center");
    }
    if (lane[c] < 0) lane[c] = lanes++;
    bool continued = false;
    for (int s : t.successors(c)) {
      if (lane[s] >= 0) continue;
      if (!continued) {
        lane[s] = lane[c];
        continued = true;
      } else {
        lane[s] = lanes++;
      }
    }
  }
  if (lanes > 2) {
    fail(ErrorCode::kStyleTopologyMismatch, "lane layouts support at most two lanes");
  }

  constexpr int kX0 = 2;
  constexpr int kLane0Row = 5;
  const int lane_row[2] = {kLane0Row, kLane0Row + 2};
  auto px = [&](int c) { return kX0 + (depth[c] + 1) * spacing; };
  auto row = [&](int c) { return lane_row[lane[c]]; };
  auto inward = [&](int c) { return lane[c] == 0 ? -1 : 1; };

  int max_x = 0;
  for (int c = 1; c <= n; ++c) max_x = std::max(max_x, px(c) + 1);
  const int width = max_x + 3;
  const int height = lanes == 1 ? kLane0Row + 2 : lane_row[1] + 6;

  MapPainter p(width, height);
  auto& m = p.map();
  m.anchors.assign(n, {});
  for (int c = 1; c <= n; ++c) {
    CenterAnchor a;
    a.processing = p.paint(px(c), row(c), Tile::kProcessing);
    a.center_tile = p.paint(px(c), row(c) + inward(c), Tile::kCenter);
    a.repair_tile = p.paint(px(c), row(c) + 2 * inward(c), Tile::kRepair);
    m.anchors[c - 1] = a;
  }

  std::vector<std::pair<int, int>> branch(n + 1, {-1, -1});
  std::vector<std::pair<int, int>> merge(n + 1, {-1, -1});
  for (int c = 1; c <= n; ++c) {
    if (t.successors(c).size() == 2) {
      branch[c] = {px(c) + 1, row(c)};
      const int b = p.paint(branch[c].first, branch[c].second, Tile::kPath);
      p.link(m.anchors[c - 1].processing, b);
    }
  }
  for (int c = 1; c <= n; ++c) {
    if (t.predecessors(c).size() == 2) {
      merge[c] = {px(c) - 1, row(c)};
      const int mc = p.paint(merge[c].first, merge[c].second, Tile::kPath);
      p.link(mc, m.anchors[c - 1].processing);
    }
  }

  for (int c : t.source_centers()) {
    const int s = p.paint(kX0, row(c), Tile::kSource);
    m.sources.push_back(s);
    p.route({{kX0, row(c)}, {px(c), row(c)}});
  }
  for (int c : t.sink_centers()) {
    const int k = p.paint(px(c) + 1, row(c), Tile::kSink);
    m.sinks.push_back(k);
    p.link(m.anchors[c - 1].processing, k);
  }

  for (int u : topo) {
    const bool branches = t.successors(u).size() == 2;
    const std::pair<int, int> start = branches ? branch[u] : std::pair{px(u), row(u)};
    for (int v : t.successors(u)) {
      const bool merges = t.predecessors(v).size() == 2;
      const std::pair<int, int> end = merges ? merge[v] : std::pair{px(v), row(v)};
      if (start == end) {
        fail(ErrorCode::kStyleTopologyMismatch, "branch and merge share a cell; increase spacing");
      }
      if (lane[u] == lane[v]) {
        p.route({start, end});
      } else if (branches && !merges) {
        p.route({start, {start.first, row(v)}, end});
      } else if (merges && !branches) {
        p.route({start, {end.first, row(u)}, end});
      } else {
        fail(ErrorCode::kStyleTopologyMismatch,
             "an edge that both branches and merges across lanes is not supported");
      }
    }
  }
  return finish(std::move(m));
}

}  // namespace detail

/// Builds the canonical TileMap for a topology. `spacing` is the distance
/// between consecutive processing cells along a lane (and from the source to
/// the first center); the circular style ignores it.
inline TileMap generate_layout(const Topology& t, LayoutStyle style, int spacing) {
  switch (style) {
    case LayoutStyle::kCircular:
      if (!t.is_chain()) {
        fail(ErrorCode::kStyleTopologyMismatch, "circular layout requires a chain topology");
      }
      return detail::circular_layout(t);
    case LayoutStyle::kLinear:
      if (!t.is_chain()) {
        fail(ErrorCode::kStyleTopologyMismatch, "linear layout requires a chain topology");
      }
      if (spacing < 2) fail(ErrorCode::kSpacingTooSmall, "spacing must be at least 2");
      return detail::lane_layout(t, spacing);
    case LayoutStyle::kBranched:
      if (spacing < 2) fail(ErrorCode::kSpacingTooSmall, "spacing must be at least 2");
      return detail::lane_layout(t, spacing);
  }
  fail(ErrorCode::kStyleTopologyMismatch, "unknown layout style");
}

/// True when the map's centers and flow realize the topology: same number of
/// centers, and center j's processing cell is reachable from center i's along
/// the flow exactly when i -> ... -> j in the topology.
inline bool realizes(const TileMap& m, const Topology& t) {
  if (m.num_centers() != t.num_centers()) return false;
  const int n = m.size();
  for (int i = 1; i <= t.num_centers(); ++i) {
    const int start = m.anchor(i).processing;
    if (start < 0 || start >= n) return false;
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int s : m.successors[c]) {
        if (!seen[s]) {
          seen[s] = 1;
          stack.push_back(s);
        }
      }
    }
    for (int j = 1; j <= t.num_centers(); ++j) {
      if (i == j) continue;
      const int pj = m.anchor(j).processing;
      if (pj < 0 || pj >= n) return false;
      if ((seen[pj] != 0) != t.reaches(i, j)) return false;
    }
  }
  return true;
}

}  // namespace supplychain
