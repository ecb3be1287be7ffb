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

// Scripted policies. They read the full world state rather than the 13x13
// observation: they serve as baselines and test partners, not as models of
// learned behaviour.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "supplychain/engine.hpp"
#include "supplychain/episode.hpp"

namespace supplychain {

namespace detail {

inline std::vector<int> others_cells(const WorldState& s, int slot) {
  std::vector<int> out;
  for (int k = 0; k < s.num_slots(); ++k) {
    if (k != slot) out.push_back(s.agents[k].cell);
  }
  return out;
}

inline Action go_to(const WorldState& s, int slot, int target) {
  const int here = s.agents[slot].cell;
  if (here == target) return Action::kWait;
  const auto occupied = others_cells(s, slot);
  return s.scene->nav().step_toward(here, target, occupied);
}

inline Action go_home(const WorldState& s, int slot) {
  return go_to(s, slot, s.map().anchor(s.agents[slot].center).center_tile);
}

/// Where `slot` would stand to help repair `center`, or nullopt when both
/// positions are taken by other agents. An agent already on one of them
/// keeps it.
inline std::optional<int> help_position(const WorldState& s, int slot, int center) {
  const CenterAnchor& a = s.map().anchor(center);
  const int here = s.agents[slot].cell;
  if (here == a.repair_tile || here == a.center_tile) return here;
  if (s.slot_at(a.repair_tile) < 0) return a.repair_tile;
  if (s.slot_at(a.center_tile) < 0) return a.center_tile;
  return std::nullopt;
}

/// Shared rule of the caring policies: stay home while the own center is
/// broken, otherwise help the nearest eligible broken center (ties to the
/// lower index), otherwise behave selfishly.
template <typename Eligible>
Action caring_action(const WorldState& s, int slot, Eligible&& eligible) {
  const int own = s.agents[slot].center;
  if (s.is_broken(own)) return go_home(s, slot);
  const Navigator& nav = s.scene->nav();
  const int here = s.agents[slot].cell;
  int best_center = 0;
  int best_target = -1;
  int best_dist = kUnreachable;
  for (int c = 1; c <= s.topology().num_centers(); ++c) {
    if (c == own || !s.is_broken(c) || !eligible(c)) continue;
    const auto pos = help_position(s, slot, c);
    if (!pos) continue;
    const int d = nav.distance(here, *pos);
    if (d < best_dist) {
      best_dist = d;
      best_center = c;
      best_target = *pos;
    }
  }
  if (best_center == 0) return go_home(s, slot);
  return go_to(s, slot, best_target);
}

}  // namespace detail

/// Walks to its own center tile and stays there.
class SelfishPolicy : public Policy {
 public:
  std::string name() const override { return "selfish"; }
  Action act(const WorldState& s, int slot) override { return detail::go_home(s, slot); }
};

/// Helps with every broken center.
class CarerPolicy : public Policy {
 public:
  std::string name() const override { return "carer"; }
  Action act(const WorldState& s, int slot) override {
    return detail::caring_action(s, slot, [](int) { return true; });
  }
};

/// Tit-for-tat carer: helps the operator of center j only if that agent
/// repaired our center within the last `window` steps, or if our own
/// center has never broken.
class ReciprocalPolicy : public Policy {
 public:
  explicit ReciprocalPolicy(int window = 200) : window_(window) {}

  std::string name() const override { return "reciprocal"; }
  int window() const { return window_; }

  void begin_episode(const WorldState& s, int /*slot*/) override {
    ever_broken_ = false;
    last_helped_me_.assign(s.topology().num_centers() + 1, -1);
  }

  Action act(const WorldState& s, int slot) override {
    return detail::caring_action(s, slot, [&](int c) { return trusts(c, s.step); });
  }

  void end_step(const WorldState& s, int slot, const StepEvents& ev) override {
    const int own = s.agents[slot].center;
    const int t = s.step - 1;  // the step these events belong to
    for (int c : ev.broke) {
      if (c == own) ever_broken_ = true;
    }
    for (const CareEvent& e : ev.repaired) {
      if (e.owner == own) last_helped_me_[e.carer] = t;
    }
  }

  /// Whether the operator of `center` would be helped at step `now`.
  bool trusts(int center, int now) const {
    if (!ever_broken_) return true;
    const int last = last_helped_me_[center];
    return last >= 0 && now - last <= window_;
  }

 private:
  int window_;
  bool ever_broken_ = false;
  std::vector<int> last_helped_me_;
};

/// Uniform over the five actions. The draw is keyed by (episode seed, step,
/// slot), so the policy is a pure function of the state.
class RandomPolicy : public Policy {
 public:
  std::string name() const override { return "random"; }
  Action act(const WorldState& s, int slot) override {
    return static_cast<Action>(keyed_index(s.seed, Stream::kPolicy, static_cast<std::uint64_t>(s.step),
                                           static_cast<std::uint64_t>(slot), kNumActions));
  }
};

class WaitPolicy : public Policy {
 public:
  std::string name() const override { return "wait"; }
  Action act(const WorldState&, int) override { return Action::kWait; }
};

struct PolicyOptions {
  int reciprocity_window = 200;
};

inline bool is_scripted_policy(std::string_view name) {
  return name == "selfish" || name == "carer" || name == "reciprocal" || name == "random" ||
         name == "wait";
}

inline std::unique_ptr<Policy> make_scripted_policy(std::string_view name,
                                                    const PolicyOptions& opts = {}) {
  if (name == "selfish") return std::make_unique<SelfishPolicy>();
  if (name == "carer") return std::make_unique<CarerPolicy>();
  if (name == "reciprocal") return std::make_unique<ReciprocalPolicy>(opts.reciprocity_window);
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "wait") return std::make_unique<WaitPolicy>();
  fail(ErrorCode::kUnknownPolicy, "unknown policy '" + std::string(name) + "'");
}

}  // namespace supplychain
