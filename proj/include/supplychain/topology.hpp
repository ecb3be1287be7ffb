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
#include <compare>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "supplychain/error.hpp"

namespace supplychain {

/// Directed edge between two processing centers. Centers are 1-indexed.
/// `from == 0` denotes the implicit source feeding a source center; it is
/// only meaningful as a key in EdgeCosts, never as a graph edge.
struct Edge {
  int from = 0;
  int to = 0;
  auto operator<=>(const Edge&) const = default;
};

inline constexpr int kSourceNode = 0;

/// Abstract supply-chain graph: vertices are processing centers 1..N.
/// Immutable once built; construct through Topology::build.
class Topology {
 public:
  Topology() = default;

  static Topology build(int num_centers, std::vector<Edge> edges) {
    if (num_centers < 1) {
      fail(ErrorCode::kInvalidCenter, "a topology needs at least one center");
    }
    Topology t;
    t.num_centers_ = num_centers;
    t.succ_.assign(num_centers + 1, {});
    t.pred_.assign(num_centers + 1, {});

    std::set<Edge> seen;
    for (const Edge& e : edges) {
      if (e.from < 1 || e.from > num_centers || e.to < 1 || e.to > num_centers) {
        fail(ErrorCode::kInvalidCenter, "edge (" + std::to_string(e.from) + "," +
                                            std::to_string(e.to) + ") outside [1," +
                                            std::to_string(num_centers) + "]");
      }
      if (e.from == e.to) {
        fail(ErrorCode::kSelfLoop, "self-loop at center " + std::to_string(e.from));
      }
      if (!seen.insert(e).second) {
        fail(ErrorCode::kDuplicateEdge, "edge (" + std::to_string(e.from) + "," +
                                            std::to_string(e.to) + ") repeated");
      }
      t.succ_[e.from].push_back(e.to);
      t.pred_[e.to].push_back(e.from);
    }
    for (int c = 1; c <= num_centers; ++c) {
      std::sort(t.succ_[c].begin(), t.succ_[c].end());
      std::sort(t.pred_[c].begin(), t.pred_[c].end());
    }
    t.edges_.assign(seen.begin(), seen.end());

    // Kahn's algorithm, smallest index first so the order is canonical.
    std::vector<int> indeg(num_centers + 1, 0);
    for (const Edge& e : t.edges_) ++indeg[e.to];
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int c = 1; c <= num_centers; ++c) {
      if (indeg[c] == 0) ready.push(c);
    }
    while (!ready.empty()) {
      const int c = ready.top();
      ready.pop();
      t.topo_.push_back(c);
      for (int n : t.succ_[c]) {
        if (--indeg[n] == 0) ready.push(n);
      }
    }
    if (static_cast<int>(t.topo_.size()) != num_centers) {
      fail(ErrorCode::kCycleDetected, "the center graph contains a directed cycle");
    }

    if (num_centers > 1) {
      for (int c = 1; c <= num_centers; ++c) {
        if (t.succ_[c].empty() && t.pred_[c].empty()) {
          fail(ErrorCode::kUnreachableCenter,
               "center " + std::to_string(c) + " is not connected to the chain");
        }
      }
    }

    for (int c = 1; c <= num_centers; ++c) {
      if (t.pred_[c].empty()) t.sources_.push_back(c);
      if (t.succ_[c].empty()) t.sinks_.push_back(c);
    }

    // reach_[i][j]: a directed path i -> ... -> j exists (i != j).
    t.reach_.assign(num_centers + 1, std::vector<char>(num_centers + 1, 0));
    for (auto it = t.topo_.rbegin(); it != t.topo_.rend(); ++it) {
      const int c = *it;
      for (int n : t.succ_[c]) {
        t.reach_[c][n] = 1;
        for (int k = 1; k <= num_centers; ++k) {
          if (t.reach_[n][k]) t.reach_[c][k] = 1;
        }
      }
    }
    return t;
  }

  int num_centers() const { return num_centers_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& source_centers() const { return sources_; }
  const std::vector<int>& sink_centers() const { return sinks_; }
  const std::vector<int>& topological_order() const { return topo_; }

  const std::vector<int>& successors(int center) const {
    check_center(center);
    return succ_[center];
  }
  const std::vector<int>& predecessors(int center) const {
    check_center(center);
    return pred_[center];
  }

  /// True iff a unit can flow from `from` to `to` (strict: from != to).
  bool reaches(int from, int to) const {
    check_center(from);
    check_center(to);
    return reach_[from][to] != 0;
  }

  bool is_source(int center) const { return predecessors(center).empty(); }
  bool is_sink(int center) const { return successors(center).empty(); }

  /// Every center has at most one predecessor (a forest rooted at sources).
  bool is_tree() const {
    for (int c = 1; c <= num_centers_; ++c) {
      if (pred_[c].size() > 1) return false;
    }
    return true;
  }

  /// A single path 1 -> ... -> N in some order.
  bool is_chain() const {
    if (sources_.size() != 1 || sinks_.size() != 1) return false;
    for (int c = 1; c <= num_centers_; ++c) {
      if (pred_[c].size() > 1 || succ_[c].size() > 1) return false;
    }
    return true;
  }

  void check_center(int center) const {
    if (center < 1 || center > num_centers_) {
      fail(ErrorCode::kInvalidCenter, "center " + std::to_string(center) +
                                          " outside [1," + std::to_string(num_centers_) + "]");
    }
  }

  bool operator==(const Topology& other) const {
    return num_centers_ == other.num_centers_ && edges_ == other.edges_;
  }

 private:
  int num_centers_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> succ_;
  std::vector<std::vector<int>> pred_;
  std::vector<int> sources_;
  std::vector<int> sinks_;
  std::vector<int> topo_;
  std::vector<std::vector<char>> reach_;
};

inline Topology build_topology(int num_centers, std::vector<Edge> edges) {
  return Topology::build(num_centers, std::move(edges));
}

/// Straight chain 1 -> 2 -> ... -> n.
inline Topology make_chain(int n) {
  std::vector<Edge> edges;
  for (int c = 1; c < n; ++c) edges.push_back({c, c + 1});
  return Topology::build(n, std::move(edges));
}

/// UP_G(i): centers from which a unit can flow to `center`, ascending.
inline std::vector<int> upstream_set(const Topology& t, int center) {
  t.check_center(center);
  std::vector<int> out;
  for (int j = 1; j <= t.num_centers(); ++j) {
    if (t.reaches(j, center)) out.push_back(j);
  }
  return out;
}

/// DO_G(i): centers a unit can reach after leaving `center`, ascending.
inline std::vector<int> downstream_set(const Topology& t, int center) {
  t.check_center(center);
  std::vector<int> out;
  for (int j = 1; j <= t.num_centers(); ++j) {
    if (t.reaches(center, j)) out.push_back(j);
  }
  return out;
}

/// Maintenance cost per edge. Missing edges cost nothing.
using EdgeCosts = std::map<Edge, double>;

/// Equal-split cost sharing on a supply tree: every edge's cost is divided
/// equally among the centers that depend on it (its head and everything
/// downstream of the head). Keys with `from == kSourceNode` are the
/// source edges feeding source centers.
inline std::map<int, double> shapley_cost_shares(const Topology& t, const EdgeCosts& costs) {
  if (!t.is_tree()) {
    fail(ErrorCode::kNotATree, "equal-split cost sharing requires every center to have at most "
                               "one predecessor");
  }
  std::map<int, double> shares;
  for (int c = 1; c <= t.num_centers(); ++c) shares[c] = 0.0;

  for (const auto& [edge, cost] : costs) {
    if (cost < 0.0) {
      fail(ErrorCode::kNegativeCost, "edge (" + std::to_string(edge.from) + "," +
                                         std::to_string(edge.to) + ") has negative cost");
    }
    t.check_center(edge.to);
    if (edge.from == kSourceNode) {
      if (!t.is_source(edge.to)) {
        fail(ErrorCode::kInvalidCenter,
             "source edge into non-source center " + std::to_string(edge.to));
      }
    } else {
      const auto& succ = t.successors(edge.from);
      if (!std::binary_search(succ.begin(), succ.end(), edge.to)) {
        fail(ErrorCode::kInvalidCenter, "edge (" + std::to_string(edge.from) + "," +
                                            std::to_string(edge.to) + ") not in topology");
      }
    }
    std::vector<int> users = downstream_set(t, edge.to);
    users.push_back(edge.to);
    const double share = cost / static_cast<double>(users.size());
    for (int u : users) shares[u] += share;
  }
  return shares;
}

}  // namespace supplychain
