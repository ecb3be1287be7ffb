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

// Reset/step surface for foreign-language bindings. A handle owns one
// episode stream and only calls the engine; it never adds dynamics.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "supplychain/config.hpp"
#include "supplychain/engine.hpp"
#include "supplychain/scenario.hpp"

namespace supplychain {

/// Event counts of one step.
struct StepInfo {
  int processed = 0;
  int broke = 0;
  int repaired = 0;
  int self_repaired = 0;
  int spawned = 0;
  int discarded = 0;
  int sank = 0;
};

struct HandleStep {
  std::vector<std::uint8_t> observations;  // slots x 13 x 13 x 3, channel-last
  std::vector<double> rewards;             // per slot
  bool done = false;
  StepInfo info;
};

class EnvHandle {
 public:
  /// Builds a handle from scenario text (same grammar as scenario files).
  static EnvHandle make(const std::string& config_text, std::uint64_t seed) {
    EnvHandle h;
    h.config_ = resolve_config(parse_config(config_text));
    h.scenario_ = scenario_from_config(h.config_);
    h.reset(seed);
    return h;
  }

  /// Starts a new episode; returns the first observations.
  std::vector<std::uint8_t> reset(std::optional<std::uint64_t> seed = std::nullopt) {
    check_open();
    if (seed) seed_ = *seed;
    const std::vector<int> assignment = detail::assignment_for(scenario_, seed_);
    state_ = init_episode(scenario_.scene, assignment, scenario_.params, seed_);
    return observations();
  }

  /// One engine step; actions are integers in [0, 5) (0 up, 1 down, 2 left,
  /// 3 right, 4 wait).
  HandleStep step(std::span<const int> actions) {
    check_open();
    if (is_terminal(*state_)) fail(ErrorCode::kEpisodeOver, "episode is over; call reset");
    if (static_cast<int>(actions.size()) != num_slots()) {
      fail(ErrorCode::kBadAction, "expected " + std::to_string(num_slots()) + " actions");
    }
    std::vector<Action> a;
    for (int x : actions) {
      if (x < 0 || x >= kNumActions) fail(ErrorCode::kBadAction, "action " + std::to_string(x) + " out of range");
      a.push_back(static_cast<Action>(x));
    }
    const StepResult r = supplychain::step(*state_, a);
    HandleStep out;
    out.observations = observations();
    out.rewards.assign(r.rewards.begin(), r.rewards.end());
    out.done = is_terminal(*state_);
    out.info = {static_cast<int>(r.events.processed.size()), static_cast<int>(r.events.broke.size()),
                static_cast<int>(r.events.repaired.size()), static_cast<int>(r.events.self_repaired.size()),
                r.events.spawned_total(), r.events.discarded, r.events.sank};
    return out;
  }

  void close() {
    state_.reset();
    closed_ = true;
  }

  bool closed() const { return closed_; }
  int num_slots() const { return scenario_.topology.num_centers(); }
  const Json& config() const { return config_; }
  const WorldState& state() const {
    check_open();
    return *state_;
  }
  static constexpr std::string_view version() { return kCodeVersion; }

 private:
  EnvHandle() = default;

  void check_open() const {
    if (closed_) fail(ErrorCode::kHandleClosed, "environment handle is closed");
  }

  std::vector<std::uint8_t> observations() const {
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(num_slots()) * kObsLength);
    for (int slot = 0; slot < num_slots(); ++slot) {
      const Observation o = observe(*state_, slot);
      out.insert(out.end(), o.begin(), o.end());
    }
    return out;
  }

  Json config_;
  Scenario scenario_;
  std::uint64_t seed_ = 0;
  std::optional<WorldState> state_;
  bool closed_ = false;
};

}  // namespace supplychain
