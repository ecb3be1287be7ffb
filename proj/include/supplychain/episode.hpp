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

// Episode driver and the line-delimited episode log.
//
// Log format (one JSON object per line, keys in the order shown):
//   {"kind":"header","version":1,"config_hash":..,"seed":..,"num_centers":..,
//    "episode_length":..,"assignment":[..],"agent_ids":[..],"policies":[..],
//    "env":{..}}
//   {"t":0,"actions":[..],"rewards":[..],"processed":[..],"broke":[..],
//    "repaired":[[carer,owner],..],"self_repaired":[..],"spawned":[..],
//    "discarded":0,"sank":0}
//   ...
//   {"kind":"footer","steps":T,"in_flight":k}

#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "supplychain/engine.hpp"

namespace supplychain {

/// Decision rule for one slot. Implementations may keep per-episode memory;
/// begin_episode resets it.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const WorldState& /*state*/, int /*slot*/) {}
  virtual Action act(const WorldState& state, int slot) = 0;
  virtual void end_step(const WorldState& /*state*/, int /*slot*/, const StepEvents& /*events*/) {}
};

inline constexpr int kLogVersion = 1;

struct EpisodeHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  int num_centers = 0;
  int episode_length = 0;
  std::vector<int> assignment;  // slot -> center
  std::vector<int> agent_ids;   // slot -> population member
  std::vector<std::string> policies;
  nlohmann::ordered_json env = nlohmann::ordered_json::object();

  bool operator==(const EpisodeHeader&) const = default;
};

struct StepRecord {
  int t = 0;
  std::vector<Action> actions;
  std::vector<int> rewards;
  StepEvents events;
  bool operator==(const StepRecord&) const = default;
};

struct EpisodeLog {
  EpisodeHeader header;
  std::vector<StepRecord> steps;
  /// Units still on the chain when the episode ended (from the final state).
  std::optional<long long> in_flight_at_end;

  bool complete() const {
    return in_flight_at_end.has_value() &&
           static_cast<int>(steps.size()) == header.episode_length;
  }
  bool operator==(const EpisodeLog&) const = default;
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::ordered_json header_json(const EpisodeHeader& h) {
  nlohmann::ordered_json j;
  j["kind"] = "header";
  j["version"] = kLogVersion;
  j["config_hash"] = h.config_hash;
  j["seed"] = h.seed;
  j["num_centers"] = h.num_centers;
  j["episode_length"] = h.episode_length;
  j["assignment"] = h.assignment;
  j["agent_ids"] = h.agent_ids;
  j["policies"] = h.policies;
  j["env"] = h.env;
  return j;
}

inline nlohmann::ordered_json step_json(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  std::vector<int> actions;
  for (Action a : r.actions) actions.push_back(static_cast<int>(a));
  j["actions"] = actions;
  j["rewards"] = r.rewards;
  j["processed"] = r.events.processed;
  j["broke"] = r.events.broke;
  auto repaired = nlohmann::ordered_json::array();
  for (const CareEvent& c : r.events.repaired) repaired.push_back({c.carer, c.owner});
  j["repaired"] = repaired;
  j["self_repaired"] = r.events.self_repaired;
  j["spawned"] = r.events.spawned;
  j["discarded"] = r.events.discarded;
  j["sank"] = r.events.sank;
  return j;
}

inline nlohmann::ordered_json parse_line(const std::string& line, int line_no) {
  try {
    return nlohmann::ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kLogParse, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace detail

inline void write_log(std::ostream& out, const EpisodeLog& log) {
  out << detail::header_json(log.header).dump() << '\n';
  for (const StepRecord& r : log.steps) out << detail::step_json(r).dump() << '\n';
  if (log.in_flight_at_end) {
    nlohmann::ordered_json f;
    f["kind"] = "footer";
    f["steps"] = log.steps.size();
    f["in_flight"] = *log.in_flight_at_end;
    out << f.dump() << '\n';
  }
}

inline std::string log_to_string(const EpisodeLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

/// Reads a log. A missing footer or a short step sequence yields a log with
/// complete() == false rather than an error; consumers that need the whole
/// episode raise TruncatedLog.
inline EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto j = detail::parse_line(line, line_no);
    try {
      if (j.contains("kind") && j["kind"] == "header") {
        EpisodeHeader& h = log.header;
        if (j.at("version").get<int>() != kLogVersion) {
          fail(ErrorCode::kLogParse, "unsupported log version");
        }
        h.config_hash = j.at("config_hash").get<std::string>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.num_centers = j.at("num_centers").get<int>();
        h.episode_length = j.at("episode_length").get<int>();
        h.assignment = j.at("assignment").get<std::vector<int>>();
        h.agent_ids = j.at("agent_ids").get<std::vector<int>>();
        h.policies = j.at("policies").get<std::vector<std::string>>();
        h.env = j.at("env");
        have_header = true;
      } else if (j.contains("kind") && j["kind"] == "footer") {
        log.in_flight_at_end = j.at("in_flight").get<long long>();
      } else {
        if (!have_header) fail(ErrorCode::kLogParse, "step record before header");
        if (log.in_flight_at_end) fail(ErrorCode::kLogParse, "step record after footer");
        StepRecord r;
        r.t = j.at("t").get<int>();
        if (r.t != static_cast<int>(log.steps.size())) {
          fail(ErrorCode::kLogParse, "line " + std::to_string(line_no) + ": step out of order");
        }
        for (int a : j.at("actions").get<std::vector<int>>()) r.actions.push_back(action_from_int(a));
        r.rewards = j.at("rewards").get<std::vector<int>>();
        r.events.processed = j.at("processed").get<std::vector<int>>();
        r.events.broke = j.at("broke").get<std::vector<int>>();
        for (const auto& pair : j.at("repaired")) {
          r.events.repaired.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
        }
        r.events.self_repaired = j.at("self_repaired").get<std::vector<int>>();
        r.events.spawned = j.at("spawned").get<std::vector<int>>();
        r.events.discarded = j.at("discarded").get<int>();
        r.events.sank = j.at("sank").get<int>();
        log.steps.push_back(std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kLogParse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) fail(ErrorCode::kTruncatedLog, "log has no header");
  return log;
}

inline EpisodeLog log_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_log(is);
}

// ---------------------------------------------------------------------------
// Driver

struct EpisodeSetup {
  std::shared_ptr<const Scene> scene;
  std::vector<int> assignment;  // slot -> center
  std::vector<int> agent_ids;   // optional, slot -> population member
  EnvParams params;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::ordered_json env = nlohmann::ordered_json::object();
};

/// Runs one episode to termination and records every step.
inline EpisodeLog run_episode(const EpisodeSetup& setup, std::span<Policy* const> policies,
                              WorldState* final_state = nullptr) {
  WorldState state = init_episode(setup.scene, setup.assignment, setup.params, setup.seed,
                                  setup.agent_ids);
  if (static_cast<int>(policies.size()) != state.num_slots()) {
    fail(ErrorCode::kBadAssignment, "one policy per slot required");
  }
  EpisodeLog log;
  EpisodeHeader& h = log.header;
  h.config_hash = setup.config_hash;
  h.seed = setup.seed;
  h.num_centers = state.topology().num_centers();
  h.episode_length = setup.params.episode_length;
  h.assignment = setup.assignment;
  for (const AgentState& a : state.agents) h.agent_ids.push_back(a.agent_id);
  for (Policy* p : policies) h.policies.push_back(p->name());
  h.env = setup.env;

  const int slots = state.num_slots();
  for (int s = 0; s < slots; ++s) policies[s]->begin_episode(state, s);
  log.steps.reserve(static_cast<std::size_t>(setup.params.episode_length));
  std::vector<Action> actions(slots);
  while (!is_terminal(state)) {
    for (int s = 0; s < slots; ++s) actions[s] = policies[s]->act(state, s);
    StepRecord rec;
    rec.t = state.step;
    rec.actions = actions;
    StepResult res = step(state, actions);
    for (int s = 0; s < slots; ++s) policies[s]->end_step(state, s, res.events);
    rec.rewards = std::move(res.rewards);
    rec.events = std::move(res.events);
    log.steps.push_back(std::move(rec));
  }
  log.in_flight_at_end = state.units_in_flight();
  if (final_state) *final_state = std::move(state);
  return log;
}

}  // namespace supplychain
