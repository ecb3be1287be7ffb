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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "supplychain/scenario.hpp"

namespace supplychain {
namespace {

namespace fs = std::filesystem;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

/// A resolved preset shrunk to test size.
Json quick(const std::string& preset, int seeds = 3, int episodes = 2, int length = 150) {
  Json user;
  user["preset"] = preset;
  user["num_seeds"] = seeds;
  user["episodes"] = episodes;
  user["env"]["episode_length"] = length;
  return resolve_config(user);
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("supplychain_scenario_test_" + name);
  fs::remove_all(d);
  return d;
}

TEST(RunConfig, OneRowPerSeedPlusTheMean) {
  const RunResult r = run_config(quick("baseline_circular"));
  ASSERT_EQ(r.settings.size(), 1u);
  ASSERT_EQ(r.settings[0].seeds.size(), 3u);
  for (const auto& s : r.settings[0].seeds) EXPECT_EQ(s.episodes.size(), 2u);
  const auto lines = lines_of(metrics_csv(r));
  ASSERT_EQ(lines.size(), 2u + 3u + 1u);
  EXPECT_EQ(lines[0], "# supplychain-metrics v1");
  EXPECT_EQ(lines[1].rfind("setting,run,seed,episodes,group_reward", 0), 0u);
  EXPECT_EQ(lines[5].rfind("\"\",mean,,3,", 0), 0u);
  const auto summary = lines_of(summary_csv(r));
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[2], lines[5]);
}

TEST(RunConfig, SeedsDeriveFromTheMasterSeed) {
  Json c = quick("baseline_circular");
  const RunResult a = run_config(c);
  c["master_seed"] = 2;
  const RunResult b = run_config(c);
  EXPECT_NE(a.settings[0].seeds[0].seed, b.settings[0].seeds[0].seed);
  EXPECT_EQ(a.settings[0].seeds[1].seed, derive_seed(1, 1));
  EXPECT_NE(a.config_hash, b.config_hash);
}

TEST(RunConfig, MeanRowAveragesTheSeedMeans) {
  const RunResult r = run_config(quick("env1"));
  std::vector<double> per_seed;
  for (const auto& s : r.settings[0].seeds) {
    double sum = 0.0;
    for (const auto& e : s.episodes) sum += e.metrics.group_reward;
    per_seed.push_back(sum / s.episodes.size());
  }
  const MeanCi expected = mean_ci(per_seed);
  const auto lines = lines_of(metrics_csv(r));
  const std::string prefix = "\"\",mean,,3," + format_number(expected.mean) + "," +
                             format_number(expected.half_width) + ",";
  EXPECT_EQ(lines.back().rfind(prefix, 0), 0u) << lines.back();
}

TEST(RunConfig, SweepExpandsEveryGridPoint) {
  const RunResult r = run_config(quick("repair_time_sweep", 2, 2));
  ASSERT_EQ(r.settings.size(), 5u);
  EXPECT_EQ(r.settings[0].label, "env.repair_time=10");
  EXPECT_EQ(r.settings[4].label, "env.repair_time=inf");
  EXPECT_EQ(r.settings[0].scenario.params.repair_time, 10);
  EXPECT_FALSE(r.settings[4].scenario.params.repair_time.has_value());
  EXPECT_EQ(lines_of(metrics_csv(r)).size(), 2u + 5u * (2u + 1u));
  EXPECT_EQ(lines_of(summary_csv(r)).size(), 2u + 5u);
}

TEST(RunConfig, TwoAxisSweepIsACartesianProduct) {
  Json c = quick("baseline_circular", 2, 2);
  c["sweep"] = Json::parse(R"({"env.repair_time": [10, "inf"], "env.spawn_prob": [0.1, 0.2, 0.3]})");
  const RunResult r = run_config(c);
  ASSERT_EQ(r.settings.size(), 6u);
  EXPECT_EQ(r.settings[0].label, "env.repair_time=10;env.spawn_prob=0.1");
  EXPECT_EQ(r.settings[5].label, "env.repair_time=inf;env.spawn_prob=0.3");
}

TEST(RunConfig, UnknownSweepKeysAreRejected) {
  Json c = quick("baseline_circular");
  c["sweep"] = Json::parse(R"({"env.speed": [1, 2]})");
  EXPECT_EQ(code_of([&] { run_config(c); }), ErrorCode::kUnknownParameter);
  c["sweep"] = Json::parse(R"({"env.repair_time": []})");
  EXPECT_EQ(code_of([&] { run_config(c); }), ErrorCode::kUnknownParameter);
}

TEST(RunConfig, ThreadCountDoesNotChangeResults) {
  Json c = quick("selfish_substitution");
  c["threads"] = 1;
  const std::string one = metrics_csv(run_config(c));
  c["threads"] = 4;
  EXPECT_EQ(metrics_csv(run_config(c)), one);
}

TEST(Artifacts, RunsAreByteIdentical) {
  const Json c = quick("env3");
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  write_artifacts(run_config(c), a);
  write_artifacts(run_config(c), b);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  // manifest, metrics, summary, care matrix, one log per seed.
  EXPECT_EQ(compared, 4 + 3);
  const Json manifest = Json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["config_hash"], config_hash(c));
  EXPECT_EQ(manifest["settings"][0]["seeds"].size(), 3u);
  EXPECT_EQ(slurp(a / "care_matrix.csv").rfind("# supplychain-care-matrix v1\ncarer,1,2,3,4\n", 0), 0u);
  std::ifstream log(a / "logs" / "setting0_seed0_ep0.jsonl");
  EXPECT_TRUE(read_log(log).complete());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Artifacts, TrainingRunsWriteCurvesAndCheckpoints) {
  Json user;
  user["preset"] = "learning_smoke";
  user["num_seeds"] = 1;
  user["episodes"] = 2;
  user["env"]["episode_length"] = 100;
  user["train"]["total_steps"] = 2000;
  user["train"]["parallel_envs"] = 2;
  user["train"]["batch_size"] = 2;
  user["train"]["log_interval"] = 1000;
  user["network"]["hidden"] = {8, 8};
  const Json c = resolve_config(user);
  const RunResult r = run_config(c);
  const fs::path dir = fresh_dir("train");
  write_artifacts(r, dir);
  EXPECT_TRUE(fs::exists(dir / "curves_seed0.csv"));
  const Checkpoint ck = load_checkpoint_file((dir / "checkpoint_seed0.bin").string());
  EXPECT_EQ(ck.config_hash, r.config_hash);
  EXPECT_EQ(ck.population.size(), 2);
  EXPECT_EQ(ck.population.members[0].net.params(),
            r.settings[0].seeds[0].population->members[0].net.params());
  // Evaluating the stored population reproduces the original evaluation.
  const RunResult again = run_config(c, {&ck.population, nullptr});
  EXPECT_EQ(metrics_csv(again), metrics_csv(r));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace supplychain
