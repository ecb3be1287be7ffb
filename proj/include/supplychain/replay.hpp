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

// Re-simulation of a logged episode from its header and recorded actions.
// Every step's events and rewards must come out exactly as logged, which
// shows the log is a complete record of the episode.

#pragma once

#include <functional>
#include <string>

#include "supplychain/episode.hpp"
#include "supplychain/metrics.hpp"
#include "supplychain/scenario.hpp"

namespace supplychain {

/// Scene described by a log header's "env" block.
inline std::shared_ptr<const Scene> scene_from_header(const EpisodeHeader& h) {
  const Json& env = h.env;
  if (!env.contains("topology") || !env.contains("layout")) {
    fail(ErrorCode::kLogMapMismatch, "log header does not describe its environment");
  }
  const Topology t = topology_from_json(env["topology"]);
  const auto style = parse_layout_style(env["layout"].value("style", ""));
  if (!style) fail(ErrorCode::kLogMapMismatch, "unknown layout style in log header");
  auto scene = Scene::generate(t, *style, env["layout"].value("spacing", 2));
  if (env.contains("map") && env["map"].get<std::string>() != to_ascii(scene->map())) {
    fail(ErrorCode::kLogMapMismatch, "logged map differs from the regenerated map");
  }
  if (t.num_centers() != h.num_centers) {
    fail(ErrorCode::kLogMapMismatch, "header center count disagrees with its topology");
  }
  return scene;
}

struct ReplayResult {
  SocialMetrics metrics;
  WorldState final_state;
};

/// Replays `log`, calling `frame(state)` before the first step and after
/// every step. Throws TruncatedLog for incomplete logs and LogMapMismatch
/// when the re-simulation disagrees with the record.
inline ReplayResult replay(const EpisodeLog& log,
                           const std::function<void(const WorldState&)>& frame = {}) {
  if (!log.complete()) {
    fail(ErrorCode::kTruncatedLog, "log holds " + std::to_string(log.steps.size()) + " of " +
                                       std::to_string(log.header.episode_length) +
                                       " steps or lacks its footer");
  }
  auto scene = scene_from_header(log.header);
  const EnvParams params = params_from_json(log.header.env.at("params"));
  if (params.episode_length != log.header.episode_length) {
    fail(ErrorCode::kLogMapMismatch, "episode length disagrees with the logged parameters");
  }
  WorldState s = init_episode(scene, log.header.assignment, params, log.header.seed,
                              log.header.agent_ids);
  if (frame) frame(s);
  for (const StepRecord& r : log.steps) {
    const StepResult res = step(s, r.actions);
    if (res.events != r.events || res.rewards != r.rewards) {
      fail(ErrorCode::kLogMapMismatch, "step " + std::to_string(r.t) +
                                           " does not reproduce the logged events");
    }
    if (frame) frame(s);
  }
  if (s.units_in_flight() != *log.in_flight_at_end) {
    fail(ErrorCode::kLogMapMismatch, "final unit count differs from the log footer");
  }
  ReplayResult out;
  out.metrics = aggregate(log, scene->topology());
  out.final_state = std::move(s);
  return out;
}

}  // namespace supplychain
