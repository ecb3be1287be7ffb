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

// Command-line experiment runner.
//
//   supplychain run <config> [--out DIR]
//   supplychain sweep <config> --grid key=v1,v2 [--grid ...] [--out DIR]
//   supplychain train <config> [--out DIR]
//   supplychain eval <config> --checkpoint PATH [--out DIR]
//   supplychain replay <log> [--every N] [--quiet]
//   supplychain metrics <logdir>
//   supplychain presets
//
// <config> is a scenario file or "preset:NAME". SUPPLY_SEED overrides the
// master seed. Exit status: 0 success, 2 configuration error, 3 runtime
// error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "supplychain/supplychain.hpp"

namespace sc = supplychain;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

bool is_config_error(sc::ErrorCode c) {
  switch (c) {
    case sc::ErrorCode::kConfigParse:
    case sc::ErrorCode::kPresetUnknown:
    case sc::ErrorCode::kUnknownParameter:
    case sc::ErrorCode::kUnknownPolicy:
      return true;
    default:
      return false;
  }
}

sc::Json load_user_config(const std::string& arg) {
  sc::Json user;
  if (arg.rfind("preset:", 0) == 0) {
    user["preset"] = arg.substr(7);
  } else {
    user = sc::load_config_file(arg);
  }
  if (const char* env = std::getenv("SUPPLY_SEED")) {
    try {
      user["master_seed"] = std::stoll(env);
    } catch (const std::exception&) {
      sc::fail(sc::ErrorCode::kConfigParse, "SUPPLY_SEED must be an integer");
    }
  }
  return sc::resolve_config(user);
}

fs::path output_dir(const std::string& flag, const sc::Json& cfg) {
  if (!flag.empty()) return flag;
  return fs::path("runs") / cfg["name"].get<std::string>();
}

void print_summary(const sc::RunResult& r) { std::cout << sc::summary_csv(r); }

int cmd_run(const std::string& config, const std::string& out, const std::vector<std::string>& grid,
            bool force_train, bool require_grid, int threads) {
  sc::Json cfg = load_user_config(config);
  if (threads > 0) cfg["threads"] = threads;
  if (force_train) cfg["kind"] = "train";
  if (require_grid) {
    if (!grid.empty()) cfg["sweep"] = sc::Json::object();
    for (const std::string& g : grid) {
      const auto eq = g.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == g.size()) {
        sc::fail(sc::ErrorCode::kUnknownParameter, "grid entries look like key=v1,v2 (got '" + g + "')");
      }
      const std::string key = g.substr(0, eq);
      sc::Json probe = cfg;
      sc::Json values = sc::Json::array();
      std::stringstream ss(g.substr(eq + 1));
      std::string item;
      while (std::getline(ss, item, ',')) values.push_back(sc::parse_grid_value(item));
      sc::set_parameter(probe, key, values.front());
      cfg["sweep"][key] = values;
    }
    if (cfg["sweep"].empty()) sc::fail(sc::ErrorCode::kUnknownParameter, "empty parameter grid");
  }
  const fs::path dir = output_dir(out, cfg);
  sc::RunResult r = sc::run_config(cfg, {nullptr, &std::cerr});
  sc::write_artifacts(r, dir);
  print_summary(r);
  std::cerr << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& config, const std::string& checkpoint, const std::string& out,
             bool greedy) {
  sc::Json cfg = load_user_config(config);
  cfg["kind"] = "train";
  if (greedy) cfg["train"]["greedy_eval"] = true;
  const sc::Checkpoint ck = sc::load_checkpoint_file(checkpoint);
  if (ck.population.match_size != cfg["train"]["match_size"].get<int>()) {
    cfg["train"]["match_size"] = ck.population.match_size;
  }
  cfg["train"]["population_size"] = ck.population.size();
  const fs::path dir = output_dir(out, cfg) / "eval";
  sc::RunResult r = sc::run_config(cfg, {&ck.population, &std::cerr});
  sc::write_artifacts(r, dir);
  print_summary(r);
  if (ck.config_hash != r.config_hash) {
    std::cerr << "note: checkpoint was trained under config " << ck.config_hash << '\n';
  }
  std::cerr << "wrote " << dir.string() << '\n';
  return 0;
}

int cmd_replay(const std::string& path, int every, bool quiet, int delay_ms) {
  std::ifstream in(path);
  if (!in) sc::fail(sc::ErrorCode::kIo, "cannot read " + path);
  const sc::EpisodeLog log = sc::read_log(in);
  int frame_no = 0;
  auto frame = [&](const sc::WorldState& s) {
    const bool last = s.step == s.params.episode_length;
    if (quiet || (frame_no++ % std::max(every, 1) != 0 && !last)) return;
    std::cout << "t=" << s.step << " units=" << s.units_in_flight() << " sank=" << s.sank
              << " discarded=" << s.discarded << '\n'
              << sc::render_ascii(s) << '\n';
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
  };
  const sc::ReplayResult r = sc::replay(log, frame);
  const auto& m = r.metrics;
  std::cout << "replay ok: " << log.steps.size() << " steps reproduced\n"
            << "group_reward=" << m.group_reward << " total_care=" << sc::format_number(m.total_care())
            << " S=" << sc::format_number(m.reciprocity) << " D=" << sc::format_number(m.direction)
            << " efficiency=" << sc::format_number(m.efficiency) << '\n';
  return 0;
}

int cmd_metrics(const std::string& dir, bool spectral) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) sc::fail(sc::ErrorCode::kIo, "no .jsonl logs in " + dir);
  std::vector<sc::SocialMetrics> all;
  std::cout << sc::kMetricsSchema << '\n' << "log,group_reward,total_care,S,D,efficiency\n";
  for (const auto& f : files) {
    std::ifstream in(f);
    const sc::EpisodeLog log = sc::read_log(in);
    const sc::Topology t = sc::topology_from_json(log.header.env.at("topology"));
    sc::AggregateOptions opts;
    if (spectral) opts.norm = sc::MatrixNorm::kSpectral;
    const sc::SocialMetrics m = sc::aggregate(log, t, opts);
    std::cout << f.filename().string() << ',' << m.group_reward << ','
              << sc::format_number(m.total_care()) << ',' << sc::format_number(m.reciprocity) << ','
              << sc::format_number(m.direction) << ',' << sc::format_number(m.efficiency) << '\n';
    if (!all.empty() && all.front().num_centers != m.num_centers) {
      sc::fail(sc::ErrorCode::kDimensionMismatch, "logs in " + dir + " differ in center count");
    }
    all.push_back(m);
  }
  if (all.size() >= 2) {
    const sc::MetricsSummary s = sc::average_metrics(all);
    auto ci = [](const sc::MeanCi& c) {
      return sc::format_number(c.mean) + " +/- " + sc::format_number(c.half_width);
    };
    std::cout << "\nmean over " << s.runs << " logs (95% CI)\n"
              << "group_reward " << ci(s.group_reward) << "\ntotal_care " << ci(s.total_care)
              << "\nS " << ci(s.reciprocity) << "\nD " << ci(s.direction) << "\nefficiency "
              << ci(s.efficiency) << "\n\nnormalized care matrix (rows give care, entries < 0.01 blank)\n"
              << sc::care_heatmap(s.care_norm);
  } else {
    std::cout << "\nnormalized care matrix (rows give care, entries < 0.01 blank)\n"
              << sc::care_heatmap(all.front().care_norm);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supply chain gridworld simulator and experiment runner"};
  app.require_subcommand(1);

  std::string config, out, checkpoint, log_path, log_dir;
  std::vector<std::string> grid;
  int threads = 0;
  int every = 1;
  int delay_ms = 0;
  bool quiet = false;
  bool greedy = false;
  bool spectral = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("config", config, "Scenario file or preset:NAME")->required();
  run->add_option("--out", out, "Output directory (default runs/<name>)");
  run->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* sweep = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
  sweep->add_option("config", config, "Scenario file or preset:NAME")->required();
  sweep->add_option("--grid", grid, "key=v1,v2,... (repeatable)");
  sweep->add_option("--out", out, "Output directory");
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* trn = app.add_subcommand("train", "Train a population, then evaluate it");
  trn->add_option("config", config, "Scenario file or preset:NAME")->required();
  trn->add_option("--out", out, "Output directory");
  trn->add_option("--threads", threads, "Worker threads (0: all cores)");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained population");
  ev->add_option("config", config, "Scenario file or preset:NAME")->required();
  ev->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  ev->add_option("--out", out, "Output directory");
  ev->add_flag("--greedy", greedy, "Take arg-max actions instead of sampling");

  auto* rep = app.add_subcommand("replay", "Re-simulate a logged episode and render it");
  rep->add_option("log", log_path, "Episode log (.jsonl)")->required();
  rep->add_option("--every", every, "Render every N-th frame");
  rep->add_option("--delay-ms", delay_ms, "Pause between frames");
  rep->add_flag("--quiet", quiet, "Only verify and print the summary");

  auto* met = app.add_subcommand("metrics", "Aggregate every log in a directory");
  met->add_option("logdir", log_dir, "Directory holding .jsonl logs")->required();
  met->add_flag("--spectral", spectral, "Use the spectral norm for S");

  auto* pre = app.add_subcommand("presets", "List scenario presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out, {}, false, false, threads);
    if (*sweep) return cmd_run(config, out, grid, false, true, threads);
    if (*trn) return cmd_run(config, out, {}, true, false, threads);
    if (*ev) return cmd_eval(config, checkpoint, out, greedy);
    if (*rep) return cmd_replay(log_path, every, quiet, delay_ms);
    if (*met) return cmd_metrics(log_dir, spectral);
    if (*pre) {
      for (const auto& n : sc::preset_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const sc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
