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

// Scenarios: resolved experiment configurations, named presets, and the
// runner that turns a scenario into logs and metric tables.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "supplychain/config.hpp"
#include "supplychain/engine.hpp"
#include "supplychain/episode.hpp"
#include "supplychain/learner.hpp"
#include "supplychain/metrics.hpp"
#include "supplychain/parallel.hpp"
#include "supplychain/policies.hpp"

namespace supplychain {

inline constexpr std::string_view kCodeVersion = "0.1.0";

// ---------------------------------------------------------------------------
// JSON descriptions shared by configs and log headers

inline Json topology_json(const Topology& t) {
  Json j;
  j["num_centers"] = t.num_centers();
  Json edges = Json::array();
  for (const Edge& e : t.edges()) edges.push_back({e.from, e.to});
  j["edges"] = edges;
  return j;
}

inline Json params_json(const EnvParams& p) {
  Json j;
  j["episode_length"] = p.episode_length;
  j["spawn_prob"] = p.spawn_prob;
  j["break_prob"] = p.break_prob;
  if (p.repair_time) {
    j["repair_time"] = *p.repair_time;
  } else {
    j["repair_time"] = "inf";
  }
  j["two_agent_repair"] = p.two_agent_repair;
  return j;
}

namespace detail {

[[noreturn]] inline void bad_field(const std::string& key, const std::string& what) {
  fail(ErrorCode::kConfigParse, "'" + key + "' " + what);
}

inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) bad_field(path + key, "is missing");
  return obj[key];
}

inline long long get_int(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number_integer()) bad_field(path + key, "must be an integer");
  return v.get<long long>();
}

inline double get_double(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number()) bad_field(path + key, "must be a number");
  return v.get<double>();
}

inline bool get_bool(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_boolean()) bad_field(path + key, "must be true or false");
  return v.get<bool>();
}

inline std::string get_string(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_string()) bad_field(path + key, "must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline EnvParams params_from_json(const Json& j) {
  using namespace detail;
  const std::string p = "env.";
  EnvParams e;
  e.episode_length = static_cast<int>(get_int(j, "episode_length", p));
  e.spawn_prob = get_double(j, "spawn_prob", p);
  e.break_prob = get_double(j, "break_prob", p);
  const Json& rt = field(j, "repair_time", p);
  if (rt.is_string() && rt.get<std::string>() == "inf") {
    e.repair_time.reset();
  } else if (rt.is_number_integer()) {
    e.repair_time = rt.get<int>();
  } else {
    bad_field("env.repair_time", "must be a positive integer or \"inf\"");
  }
  e.two_agent_repair = get_bool(j, "two_agent_repair", p);
  try {
    e.validate();
  } catch (const Error& err) {
    fail(ErrorCode::kConfigParse, err.what());
  }
  return e;
}

inline Topology topology_preset(std::string_view name, int num_centers) {
  if (name == "chain") return make_chain(num_centers);
  if (name == "env1") return build_topology(4, {{1, 2}, {1, 3}, {3, 4}});
  if (name == "env2") return build_topology(4, {{1, 2}, {2, 3}, {2, 4}});
  if (name == "env3") return build_topology(4, {{1, 2}, {1, 3}, {2, 4}, {3, 4}});
  fail(ErrorCode::kPresetUnknown, "unknown topology preset '" + std::string(name) + "'");
}

/// Reads {"preset": ..., "num_centers": N, "edges": [[a, b], ...]}; an
/// explicit edge list wins over the preset.
inline Topology topology_from_json(const Json& j) {
  using namespace detail;
  const int n = static_cast<int>(get_int(j, "num_centers", "topology."));
  const Json& edges = j.contains("edges") ? j["edges"] : Json::array();
  if (!edges.is_array()) bad_field("topology.edges", "must be an array of pairs");
  if (!edges.empty()) {
    std::vector<Edge> list;
    for (const Json& e : edges) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        bad_field("topology.edges", "must hold [from, to] integer pairs");
      }
      list.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    return build_topology(n, std::move(list));
  }
  const std::string preset = j.contains("preset") ? get_string(j, "preset", "topology.") : "chain";
  return topology_preset(preset, n);
}

// ---------------------------------------------------------------------------
// Configuration defaults and presets

inline Json default_config() {
  Json c;
  c["name"] = "scenario";
  c["preset"] = "";
  c["kind"] = "scripted";
  c["master_seed"] = 1;
  c["num_seeds"] = 8;
  c["episodes"] = 10;
  c["log_episodes"] = 1;
  c["threads"] = 0;
  c["topology"] = {{"preset", "chain"}, {"num_centers", 4}, {"edges", Json::array()}};
  c["layout"] = {{"style", "circular"}, {"spacing", 2}};
  c["env"] = params_json(EnvParams{});
  c["policies"] = {{"names", {"reciprocal", "reciprocal", "reciprocal", "reciprocal"}},
                   {"reciprocity_window", 200}};
  c["assignment"] = {{"mode", "fixed"}};
  c["metrics"] = {{"norm", "frobenius"}};
  Json train = TrainConfig{}.to_json();
  train.erase("assignment");
  train.erase("network");
  train["greedy_eval"] = false;
  c["train"] = train;
  c["network"] = NetworkConfig{}.to_json();
  c["sweep"] = Json::object();
  return c;
}

inline std::vector<std::string> preset_names() {
  return {"baseline_circular", "selfish_substitution", "repair_time_sweep",
          "linear_distance_sweep", "env1", "env2", "env3", "specialization", "learning_smoke"};
}

/// Partial configuration of a named preset (merged over the defaults).
inline Json preset_config(std::string_view name) {
  Json c = Json::object();
  c["name"] = name;
  if (name == "baseline_circular") {
    // Four reciprocal agents on the ring, self-repair off.
  } else if (name == "selfish_substitution") {
    c["policies"]["names"] = {"reciprocal", "reciprocal", "reciprocal", "selfish"};
  } else if (name == "repair_time_sweep") {
    c["sweep"]["env.repair_time"] = {10, 30, 100, 300, "inf"};
  } else if (name == "linear_distance_sweep") {
    c["layout"] = {{"style", "linear"}, {"spacing", 2}};
    c["sweep"]["layout.spacing"] = {2, 3, 4, 5, 6, 7};
  } else if (name == "env1" || name == "env2" || name == "env3") {
    c["topology"] = {{"preset", name}, {"num_centers", 4}};
    c["layout"] = {{"style", "branched"}, {"spacing", 3}};
    c["policies"]["names"] = {"carer", "carer", "carer", "carer"};
  } else if (name == "specialization") {
    c["kind"] = "train";
    c["num_seeds"] = 2;
    c["episodes"] = 8;
    c["assignment"]["mode"] = "fixed";
    c["train"] = {{"total_steps", 200000}, {"population_size", 8}, {"match_size", 4},
                  {"batch_size", 4}, {"learning_rate", 1e-3}};
    c["sweep"]["assignment.mode"] = {"random", "fixed"};
  } else if (name == "learning_smoke") {
    c["kind"] = "train";
    c["num_seeds"] = 5;
    c["episodes"] = 20;
    c["topology"] = {{"preset", "chain"}, {"num_centers", 2}};
    c["layout"] = {{"style", "linear"}, {"spacing", 2}};
    c["env"]["repair_time"] = 10;
    c["policies"]["names"] = {"reciprocal", "reciprocal"};
    c["assignment"]["mode"] = "fixed";
    c["train"] = {{"total_steps", 500000}, {"population_size", 2}, {"match_size", 2},
                  {"batch_size", 4}, {"learning_rate", 1e-3}};
  } else {
    fail(ErrorCode::kPresetUnknown, "unknown preset '" + std::string(name) + "'");
  }
  return c;
}

namespace detail {

// Merges `over` into `base`. Keys absent from `base` are rejected except
// below the free-form tables (sweep, topology.edges).
inline void merge_into(Json& base, const Json& over, const std::string& path) {
  if (!over.is_object()) fail(ErrorCode::kConfigParse, "'" + path + "' must be a table");
  for (const auto& [k, v] : over.items()) {
    const std::string key = path.empty() ? k : path + "." + k;
    if (key == "sweep") {
      if (!v.is_object()) fail(ErrorCode::kConfigParse, "'sweep' must be a table");
      for (const auto& [sk, sv] : v.items()) base["sweep"][sk] = sv;
      continue;
    }
    if (!base.contains(k)) fail(ErrorCode::kConfigParse, "unknown key '" + key + "'");
    if (base[k].is_object() && !base[k].empty()) {
      merge_into(base[k], v, key);
    } else {
      base[k] = v;
    }
  }
}

}  // namespace detail

/// Defaults, then the preset named by `preset` (if any), then the user's
/// keys.
inline Json resolve_config(const Json& user) {
  Json c = default_config();
  if (user.contains("preset")) {
    const Json& p = user["preset"];
    if (!p.is_string()) fail(ErrorCode::kConfigParse, "'preset' must be a string");
    if (!p.get<std::string>().empty()) detail::merge_into(c, preset_config(p.get<std::string>()), "");
  }
  detail::merge_into(c, user, "");
  return c;
}

inline Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfigParse, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Overwrites one scalar setting addressed by a dotted key such as
/// "env.repair_time". Unknown or non-scalar keys raise UnknownParameter.
inline void set_parameter(Json& config, const std::string& dotted, const Json& value) {
  Json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos
                                                                          : dot - start);
    if (!node->is_object() || !node->contains(key) || key == "sweep") {
      fail(ErrorCode::kUnknownParameter, "unknown parameter '" + dotted + "'");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object() || (node->is_array() && dotted != "policies.names")) {
    fail(ErrorCode::kUnknownParameter, "'" + dotted + "' is not a scalar parameter");
  }
  *node = value;
}

/// Parses a command-line grid value: integer, float, bool, or string.
inline Json parse_grid_value(const std::string& text) {
  try {
    return parse_config("v = " + text)["v"];
  } catch (const Error&) {
    return text;
  }
}

// ---------------------------------------------------------------------------
// Resolved scenario

struct Scenario {
  Json config;
  std::string name;
  std::string kind;  // "scripted" or "train"
  Topology topology;
  LayoutStyle style = LayoutStyle::kCircular;
  int spacing = 2;
  EnvParams params;
  std::vector<std::string> policies;
  PolicyOptions policy_options;
  AssignmentMode assignment = AssignmentMode::kFixed;
  MatrixNorm norm = MatrixNorm::kFrobenius;
  std::uint64_t master_seed = 1;
  int num_seeds = 8;
  int episodes = 10;
  int log_episodes = 1;
  int threads = 0;
  TrainConfig train;
  bool greedy_eval = false;
  std::shared_ptr<const Scene> scene;

  std::uint64_t seed(int k) const { return derive_seed(master_seed, static_cast<std::uint64_t>(k)); }
  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> out;
    for (int k = 0; k < num_seeds; ++k) out.push_back(seed(k));
    return out;
  }

  /// Description stored in every log header; enough to rebuild the scene.
  Json env_json() const {
    Json j;
    j["topology"] = topology_json(topology);
    j["layout"] = {{"style", layout_style_name(style)}, {"spacing", spacing}};
    j["params"] = params_json(params);
    j["map"] = to_ascii(scene->map());
    return j;
  }
};

inline Scenario scenario_from_config(const Json& c) {
  using namespace detail;
  Scenario s;
  s.config = c;
  s.name = get_string(c, "name", "");
  s.kind = get_string(c, "kind", "");
  if (s.kind != "scripted" && s.kind != "train") bad_field("kind", "must be \"scripted\" or \"train\"");
  const long long seed = get_int(c, "master_seed", "");
  if (seed < 0) bad_field("master_seed", "must be non-negative");
  s.master_seed = static_cast<std::uint64_t>(seed);
  s.num_seeds = static_cast<int>(get_int(c, "num_seeds", ""));
  s.episodes = static_cast<int>(get_int(c, "episodes", ""));
  s.log_episodes = static_cast<int>(get_int(c, "log_episodes", ""));
  s.threads = static_cast<int>(get_int(c, "threads", ""));
  if (s.num_seeds < 1) bad_field("num_seeds", "must be at least 1");
  if (s.episodes < 1) bad_field("episodes", "must be at least 1");

  s.topology = topology_from_json(field(c, "topology", ""));
  const Json& layout = field(c, "layout", "");
  const auto style = parse_layout_style(get_string(layout, "style", "layout."));
  if (!style) bad_field("layout.style", "must be circular, linear or branched");
  s.style = *style;
  s.spacing = static_cast<int>(get_int(layout, "spacing", "layout."));
  s.params = params_from_json(field(c, "env", ""));

  const Json& pol = field(c, "policies", "");
  const Json& names = field(pol, "names", "policies.");
  if (!names.is_array()) bad_field("policies.names", "must be an array of strings");
  for (const Json& n : names) {
    if (!n.is_string()) bad_field("policies.names", "must be an array of strings");
    s.policies.push_back(n.get<std::string>());
  }
  s.policy_options.reciprocity_window =
      static_cast<int>(get_int(pol, "reciprocity_window", "policies."));
  if (s.kind == "scripted") {
    if (static_cast<int>(s.policies.size()) != s.topology.num_centers()) {
      bad_field("policies.names", "needs one entry per center");
    }
    for (const auto& n : s.policies) {
      if (!is_scripted_policy(n)) fail(ErrorCode::kConfigParse, "unknown policy '" + n + "'");
    }
  }
  s.assignment = parse_assignment_mode(get_string(field(c, "assignment", ""), "mode", "assignment."));
  const std::string norm = get_string(field(c, "metrics", ""), "norm", "metrics.");
  if (norm == "frobenius") {
    s.norm = MatrixNorm::kFrobenius;
  } else if (norm == "spectral") {
    s.norm = MatrixNorm::kSpectral;
  } else {
    bad_field("metrics.norm", "must be \"frobenius\" or \"spectral\"");
  }

  const Json& t = field(c, "train", "");
  const std::string tp = "train.";
  TrainConfig& tc = s.train;
  tc.discount = get_double(t, "discount", tp);
  tc.unroll_length = static_cast<int>(get_int(t, "unroll_length", tp));
  tc.entropy_weight = get_double(t, "entropy_weight", tp);
  tc.value_weight = get_double(t, "value_weight", tp);
  tc.batch_size = static_cast<int>(get_int(t, "batch_size", tp));
  tc.learning_rate = get_double(t, "learning_rate", tp);
  tc.rms_decay = get_double(t, "rms_decay", tp);
  tc.rms_epsilon = get_double(t, "rms_epsilon", tp);
  tc.total_steps = get_int(t, "total_steps", tp);
  tc.parallel_envs = static_cast<int>(get_int(t, "parallel_envs", tp));
  tc.population_size = static_cast<int>(get_int(t, "population_size", tp));
  tc.match_size = static_cast<int>(get_int(t, "match_size", tp));
  tc.log_interval = get_int(t, "log_interval", tp);
  tc.frozen = get_bool(t, "frozen", tp);
  tc.assignment_mode = s.assignment;
  tc.threads = s.threads;
  s.greedy_eval = get_bool(t, "greedy_eval", tp);
  const Json& net = field(c, "network", "");
  tc.network.conv_channels = static_cast<int>(get_int(net, "conv_channels", "network."));
  tc.network.lstm_size = static_cast<int>(get_int(net, "lstm_size", "network."));
  const Json& hidden = field(net, "hidden", "network.");
  if (!hidden.is_array() || hidden.empty()) bad_field("network.hidden", "must be a non-empty array");
  tc.network.hidden.clear();
  for (const Json& h : hidden) {
    if (!h.is_number_integer() || h.get<int>() < 1) bad_field("network.hidden", "must hold sizes");
    tc.network.hidden.push_back(h.get<int>());
  }
  if (s.kind == "train") {
    try {
      tc.validate();
    } catch (const Error& e) {
      fail(ErrorCode::kConfigParse, e.what());
    }
    if (tc.match_size != s.topology.num_centers()) {
      bad_field("train.match_size", "must equal the number of centers");
    }
  }
  s.scene = Scene::generate(s.topology, s.style, s.spacing);
  return s;
}

inline Scenario load_scenario(const Json& user) { return scenario_from_config(resolve_config(user)); }

// ---------------------------------------------------------------------------
// Running

struct EpisodeOutcome {
  SocialMetrics metrics;
  std::optional<EpisodeLog> log;  // kept for the first log_episodes episodes
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeOutcome> episodes;
  std::vector<CurvePoint> curves;  // training runs only
  std::optional<Population> population;
};

struct SettingResult {
  std::string label;  // "key=value;..." or empty without a sweep
  Json overrides = Json::object();
  Scenario scenario;
  std::vector<SeedResult> seeds;
};

struct RunResult {
  Json config;
  std::string config_hash;
  std::vector<SettingResult> settings;
};

/// Scalar summary of several episodes (or several seeds).
struct RowStats {
  int count = 0;
  MeanCi group_reward, total_care, care_per_agent, reciprocity, direction, efficiency;
};

inline RowStats row_stats(std::span<const SocialMetrics> ms) {
  RowStats r;
  r.count = static_cast<int>(ms.size());
  auto stat = [&](auto get) {
    std::vector<double> v;
    for (const auto& m : ms) v.push_back(static_cast<double>(get(m)));
    if (v.size() >= 2) return mean_ci(v);
    return MeanCi{v.empty() ? 0.0 : v[0], 0.0};
  };
  r.group_reward = stat([](const SocialMetrics& m) { return m.group_reward; });
  r.total_care = stat([](const SocialMetrics& m) { return m.total_care(); });
  r.care_per_agent = stat([](const SocialMetrics& m) { return m.care_per_agent(); });
  r.reciprocity = stat([](const SocialMetrics& m) { return m.reciprocity; });
  r.direction = stat([](const SocialMetrics& m) { return m.direction; });
  r.efficiency = stat([](const SocialMetrics& m) { return m.efficiency; });
  return r;
}

namespace detail {

inline std::vector<std::pair<std::string, Json>> grid_points(const Json& sweep, std::vector<Json>& overrides) {
  std::vector<std::pair<std::string, Json>> axes;
  for (const auto& [k, v] : sweep.items()) {
    if (!v.is_array() || v.empty()) {
      fail(ErrorCode::kUnknownParameter, "sweep '" + k + "' needs a non-empty list of values");
    }
    axes.emplace_back(k, v);
  }
  overrides.clear();
  if (axes.empty()) return axes;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (;;) {
    Json o = Json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) o[axes[a].first] = axes[a].second[idx[a]];
    overrides.push_back(o);
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return axes;
    }
  }
}

inline std::string value_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

inline std::string override_label(const Json& o) {
  std::string out;
  for (const auto& [k, v] : o.items()) {
    if (!out.empty()) out += ';';
    out += k + "=" + value_text(v);
  }
  return out;
}

inline std::vector<int> assignment_for(const Scenario& sc, std::uint64_t episode_seed) {
  std::vector<int> a(sc.topology.num_centers());
  std::iota(a.begin(), a.end(), 1);
  if (sc.assignment == AssignmentMode::kRandom) {
    Rng rng(derive_seed(episode_seed, 0xa55));
    rng.shuffle(std::span<int>(a));
  }
  return a;
}

inline EpisodeOutcome scripted_episode(const Scenario& sc, const std::string& hash,
                                       std::uint64_t seed, bool keep_log) {
  std::vector<std::unique_ptr<Policy>> owned;
  std::vector<Policy*> policies;
  for (const auto& n : sc.policies) {
    owned.push_back(make_scripted_policy(n, sc.policy_options));
    policies.push_back(owned.back().get());
  }
  EpisodeSetup setup;
  setup.scene = sc.scene;
  setup.assignment = assignment_for(sc, seed);
  setup.params = sc.params;
  setup.seed = seed;
  setup.config_hash = hash;
  setup.env = sc.env_json();
  EpisodeLog log = run_episode(setup, policies);
  EpisodeOutcome out;
  out.metrics = aggregate(log, sc.topology, {sc.norm});
  if (keep_log) out.log = std::move(log);
  return out;
}

inline EpisodeOutcome learned_episode(const Scenario& sc, const std::string& hash,
                                      const Population& pop, std::uint64_t seed, bool keep_log) {
  Rng rng(derive_seed(seed, 0x3a7c));
  const Match match = sample_match(pop.size(), pop.match_size, sc.assignment, rng);
  std::vector<std::unique_ptr<Policy>> owned;
  std::vector<Policy*> policies;
  for (int id : match.agent_ids) {
    owned.push_back(std::make_unique<LearnedPolicy>(&pop.member(id).net, id, sc.greedy_eval));
    policies.push_back(owned.back().get());
  }
  EpisodeSetup setup;
  setup.scene = sc.scene;
  setup.assignment = match.assignment;
  setup.agent_ids = match.agent_ids;
  setup.params = sc.params;
  setup.seed = seed;
  setup.config_hash = hash;
  setup.env = sc.env_json();
  EpisodeLog log = run_episode(setup, policies);
  EpisodeOutcome out;
  out.metrics = aggregate(log, sc.topology, {sc.norm});
  if (keep_log) out.log = std::move(log);
  return out;
}

}  // namespace detail

struct RunOptions {
  /// Train anew for "train" scenarios; when set, evaluate this population
  /// instead.
  const Population* population = nullptr;
  std::ostream* progress = nullptr;
};

/// Runs every sweep setting x seed x episode of a resolved configuration.
inline RunResult run_config(const Json& resolved, const RunOptions& opts = {}) {
  RunResult res;
  res.config = resolved;
  res.config_hash = config_hash(resolved);
  std::vector<Json> overrides;
  detail::grid_points(resolved["sweep"], overrides);
  if (overrides.empty()) overrides.push_back(Json::object());
  for (const Json& o : overrides) {
    Json cfg = resolved;
    for (const auto& [k, v] : o.items()) set_parameter(cfg, k, v);
    SettingResult setting{detail::override_label(o), o, scenario_from_config(cfg), {}};
    const Scenario& sc = setting.scenario;
    if (opts.progress && !setting.label.empty()) *opts.progress << "setting " << setting.label << '\n';
    setting.seeds.resize(sc.num_seeds);
    for (int k = 0; k < sc.num_seeds; ++k) setting.seeds[k].seed = sc.seed(k);

    if (sc.kind == "train" && !opts.population) {
      for (int k = 0; k < sc.num_seeds; ++k) {
        if (opts.progress) *opts.progress << "training seed " << k << '\n';
        TrainResult tr = train(TrainEnv{sc.scene, sc.params}, sc.train, sc.seed(k));
        setting.seeds[k].curves = std::move(tr.curves);
        setting.seeds[k].population = std::move(tr.population);
      }
    }
    const std::size_t total = static_cast<std::size_t>(sc.num_seeds) * sc.episodes;
    std::vector<EpisodeOutcome> outcomes(total);
    parallel_for(total, sc.threads, [&](std::size_t i) {
      const int k = static_cast<int>(i / sc.episodes);
      const int e = static_cast<int>(i % sc.episodes);
      const std::uint64_t seed = derive_seed(sc.seed(k), static_cast<std::uint64_t>(e));
      const bool keep = e < sc.log_episodes;
      if (sc.kind == "scripted") {
        outcomes[i] = detail::scripted_episode(sc, res.config_hash, seed, keep);
      } else {
        const Population& pop = opts.population ? *opts.population : *setting.seeds[k].population;
        outcomes[i] = detail::learned_episode(sc, res.config_hash, pop, seed, keep);
      }
    });
    for (std::size_t i = 0; i < total; ++i) {
      setting.seeds[i / sc.episodes].episodes.push_back(std::move(outcomes[i]));
    }
    res.settings.push_back(std::move(setting));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace detail {

inline std::string ci_text(const MeanCi& m, bool with_ci) {
  return format_number(m.mean) + "," + (with_ci ? format_number(m.half_width) : std::string());
}

inline void write_row(std::ostream& out, const std::string& setting, const std::string& run,
                      const std::string& seed, const RowStats& r, bool with_ci) {
  out << '"' << setting << "\"," << run << ',' << seed << ',' << r.count << ','
      << ci_text(r.group_reward, with_ci) << ',' << ci_text(r.total_care, with_ci) << ','
      << ci_text(r.care_per_agent, with_ci) << ',' << ci_text(r.reciprocity, with_ci) << ','
      << ci_text(r.direction, with_ci) << ',' << ci_text(r.efficiency, with_ci) << '\n';
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + p.string());
  out << text;
}

inline const std::string kRowHeader =
    "setting,run,seed,episodes,group_reward,group_reward_ci,total_care,total_care_ci,"
    "care_per_agent,care_per_agent_ci,S,S_ci,D,D_ci,efficiency,efficiency_ci\n";

}  // namespace detail

/// Per-seed rows plus one averaged row per setting. Seed rows average the
/// seed's episodes; the averaged row treats each seed as one run.
inline std::string metrics_csv(const RunResult& r) {
  std::ostringstream out;
  out << kMetricsSchema << '\n' << detail::kRowHeader;
  for (const SettingResult& s : r.settings) {
    std::vector<double> per_seed[6];
    for (std::size_t k = 0; k < s.seeds.size(); ++k) {
      std::vector<SocialMetrics> ms;
      for (const auto& e : s.seeds[k].episodes) ms.push_back(e.metrics);
      const RowStats row = row_stats(ms);
      detail::write_row(out, s.label, std::to_string(k), std::to_string(s.seeds[k].seed), row,
                        ms.size() >= 2);
      per_seed[0].push_back(row.group_reward.mean);
      per_seed[1].push_back(row.total_care.mean);
      per_seed[2].push_back(row.care_per_agent.mean);
      per_seed[3].push_back(row.reciprocity.mean);
      per_seed[4].push_back(row.direction.mean);
      per_seed[5].push_back(row.efficiency.mean);
    }
    RowStats mean;
    mean.count = static_cast<int>(s.seeds.size());
    const bool ci = s.seeds.size() >= 2;
    auto agg = [&](const std::vector<double>& v) { return ci ? mean_ci(v) : MeanCi{v[0], 0.0}; };
    mean.group_reward = agg(per_seed[0]);
    mean.total_care = agg(per_seed[1]);
    mean.care_per_agent = agg(per_seed[2]);
    mean.reciprocity = agg(per_seed[3]);
    mean.direction = agg(per_seed[4]);
    mean.efficiency = agg(per_seed[5]);
    detail::write_row(out, s.label, "mean", "", mean, ci);
  }
  return out.str();
}

/// One averaged row per setting (the last row of each group in metrics.csv).
inline std::string summary_csv(const RunResult& r) {
  std::istringstream in(metrics_csv(r));
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0 || line.rfind("setting,", 0) == 0 ||
        line.find(",mean,") != std::string::npos) {
      out << line << '\n';
    }
  }
  return out.str();
}

inline Matrix mean_care_matrix(const SettingResult& s) {
  const int n = s.scenario.topology.num_centers();
  Matrix m = Matrix::Zero(n, n);
  int count = 0;
  for (const auto& sr : s.seeds) {
    for (const auto& e : sr.episodes) {
      m += e.metrics.care_norm;
      ++count;
    }
  }
  return count ? Matrix(m / count) : m;
}

inline Json manifest_json(const RunResult& r) {
  Json m;
  m["name"] = r.config["name"];
  m["code_version"] = kCodeVersion;
  m["config_hash"] = r.config_hash;
  m["master_seed"] = r.config["master_seed"];
  Json settings = Json::array();
  for (const SettingResult& s : r.settings) {
    Json seeds = Json::array();
    for (const auto& sr : s.seeds) seeds.push_back(sr.seed);
    settings.push_back({{"label", s.label}, {"overrides", s.overrides}, {"seeds", seeds}});
  }
  m["settings"] = settings;
  m["config"] = r.config;
  return m;
}

/// Writes manifest.json, metrics.csv, summary.csv, care matrices, episode
/// logs and (for training runs) curves and checkpoints into `dir`.
inline void write_artifacts(const RunResult& r, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "logs");
  detail::write_text(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
  detail::write_text(dir / "metrics.csv", metrics_csv(r));
  detail::write_text(dir / "summary.csv", summary_csv(r));
  const bool many = r.settings.size() > 1;
  for (std::size_t i = 0; i < r.settings.size(); ++i) {
    const SettingResult& s = r.settings[i];
    const std::string tag = many ? "_" + std::to_string(i) : "";
    std::ostringstream care;
    if (!s.label.empty()) care << "# setting " << s.label << '\n';
    write_care_csv(care, mean_care_matrix(s));
    detail::write_text(dir / ("care_matrix" + tag + ".csv"), care.str());
    for (std::size_t k = 0; k < s.seeds.size(); ++k) {
      const SeedResult& sr = s.seeds[k];
      for (std::size_t e = 0; e < sr.episodes.size(); ++e) {
        if (!sr.episodes[e].log) continue;
        const std::string name = "setting" + std::to_string(i) + "_seed" + std::to_string(k) +
                                 "_ep" + std::to_string(e) + ".jsonl";
        detail::write_text(dir / "logs" / name, log_to_string(*sr.episodes[e].log));
      }
      if (!sr.curves.empty()) {
        std::ostringstream curves;
        write_curves_csv(curves, sr.curves);
        detail::write_text(dir / ("curves" + tag + "_seed" + std::to_string(k) + ".csv"), curves.str());
      }
      if (sr.population) {
        std::ostringstream ck;
        save_checkpoint(ck, *sr.population, r.config_hash);
        detail::write_text(dir / ("checkpoint" + tag + "_seed" + std::to_string(k) + ".bin"), ck.str());
      }
    }
  }
}

}  // namespace supplychain
