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

#include <cmath>
#include <sstream>

#include "supplychain/learner.hpp"
#include "supplychain/policies.hpp"

namespace supplychain {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

TrainEnv mini_chain() {
  EnvParams p;
  p.episode_length = 200;
  p.repair_time = 10;
  return {Scene::generate(make_chain(2), LayoutStyle::kLinear, 2), p};
}

TrainConfig small_config() {
  TrainConfig c;
  c.population_size = 2;
  c.match_size = 2;
  c.parallel_envs = 2;
  c.unroll_length = 20;
  c.batch_size = 2;
  c.learning_rate = 1e-3;
  c.total_steps = 4000;
  c.log_interval = 1000;
  c.network.hidden = {16, 16};
  return c;
}

std::vector<Observation> observations_of(const TrainEnv& env, int count) {
  WorldState s = init_episode(env.scene, std::vector<int>{1, 2}, env.params, 5);
  auto rnd = make_scripted_policy("random");
  std::vector<Observation> out;
  std::vector<Action> a(2);
  while (static_cast<int>(out.size()) < count && !is_terminal(s)) {
    out.push_back(observe(s, 0));
    for (int k = 0; k < 2; ++k) a[k] = rnd->act(s, k);
    step(s, a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matches

TEST(SampleMatch, FixedModeAlwaysSeatsTheFirstMembersInOrder) {
  Rng rng(1);
  for (int k = 0; k < 100; ++k) {
    const Match m = sample_match(8, 4, AssignmentMode::kFixed, rng);
    EXPECT_EQ(m.agent_ids, (std::vector<int>{1, 2, 3, 4}));
    EXPECT_EQ(m.assignment, (std::vector<int>{1, 2, 3, 4}));
  }
}

TEST(SampleMatch, RandomModeIsUniformOverMembersAndCenters) {
  Rng rng(2);
  const int draws = 100000;
  std::vector<int> picked(9, 0);
  std::vector<std::vector<int>> pair(9, std::vector<int>(5, 0));
  for (int k = 0; k < draws; ++k) {
    const Match m = sample_match(8, 4, AssignmentMode::kRandom, rng);
    std::vector<int> ids = m.agent_ids;
    std::sort(ids.begin(), ids.end());
    ASSERT_EQ(std::unique(ids.begin(), ids.end()), ids.end());
    for (int s = 0; s < 4; ++s) {
      ++picked[m.agent_ids[s]];
      ++pair[m.agent_ids[s]][m.assignment[s]];
    }
  }
  for (int a = 1; a <= 8; ++a) {
    EXPECT_NEAR(picked[a] / static_cast<double>(draws), 0.5, 0.01);
    for (int c = 1; c <= 4; ++c) EXPECT_NEAR(pair[a][c] / static_cast<double>(draws), 0.125, 0.01);
  }
}

TEST(SampleMatch, RejectsOversizedMatches) {
  Rng rng(3);
  EXPECT_EQ(code_of([&] { sample_match(2, 4, AssignmentMode::kRandom, rng); }),
            ErrorCode::kInvalidParams);
}

// ---------------------------------------------------------------------------
// Training

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  TrainConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  const TrainResult moved = train(mini_chain(), cfg, 7);
  const Population init = make_population(2, 2, cfg.network, derive_seed(7, 0x9e37));
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(moved.population.members[k].net.params(), init.members[k].net.params());
    EXPECT_GT(moved.population.members[k].updates, 0);
  }
  cfg.frozen = true;
  const TrainResult frozen = train(mini_chain(), cfg, 7);
  ASSERT_EQ(moved.curves.size(), frozen.curves.size());
  for (std::size_t i = 0; i < moved.curves.size(); ++i) {
    EXPECT_EQ(moved.curves[i].group_reward, frozen.curves[i].group_reward);
    EXPECT_EQ(moved.curves[i].total_care, frozen.curves[i].total_care);
    EXPECT_EQ(moved.curves[i].reciprocity, frozen.curves[i].reciprocity);
  }
}

TEST(Train, IsReproducibleAcrossThreadCounts) {
  TrainConfig cfg = small_config();
  cfg.threads = 1;
  const TrainResult a = train(mini_chain(), cfg, 9);
  cfg.threads = 3;
  const TrainResult b = train(mini_chain(), cfg, 9);
  for (int k = 0; k < 2; ++k) {
    EXPECT_EQ(a.population.members[k].net.params(), b.population.members[k].net.params());
  }
  std::ostringstream ca, cb;
  write_curves_csv(ca, a.curves);
  write_curves_csv(cb, b.curves);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().rfind("step,group_reward,total_care,S,D\n", 0), 0u);
}

TEST(Train, MembersLearnOnlyFromTheirOwnEpisodes) {
  TrainConfig cfg = small_config();
  cfg.population_size = 5;
  cfg.assignment_mode = AssignmentMode::kFixed;
  const TrainResult r = train(mini_chain(), cfg, 4);
  const Population init = make_population(5, 2, cfg.network, derive_seed(4, 0x9e37));
  for (int k = 0; k < 5; ++k) {
    const bool played = k < 2;
    EXPECT_EQ(r.population.members[k].updates > 0, played) << "member " << k + 1;
    EXPECT_EQ(r.population.members[k].net.params() == init.members[k].net.params(), !played);
  }
}

TEST(Train, LargeEntropyWeightKeepsThePolicyNearUniform) {
  TrainConfig cfg = small_config();
  cfg.entropy_weight = 10.0;
  cfg.total_steps = 20000;
  const TrainEnv env = mini_chain();
  const TrainResult r = train(env, cfg, 2);
  const auto obs = observations_of(env, 150);
  for (const Member& m : r.population.members) {
    EXPECT_GE(policy_entropy(m.net, obs, m.net.initial_state()), 0.95 * std::log(5.0));
  }
  EXPECT_GE(r.curves.back().entropy, 0.95 * std::log(5.0));
}

TEST(Train, RejectsMismatchedMatchSize) {
  TrainConfig cfg = small_config();
  cfg.population_size = 4;
  cfg.match_size = 4;
  EXPECT_EQ(code_of([&] { train(mini_chain(), cfg, 1); }), ErrorCode::kInvalidParams);
}

TEST(Bandit, PolicyConcentratesOnTheRewardedAction) {
  // One-step episodes on a fixed observation; only kRight pays.
  const TrainEnv env = mini_chain();
  const Observation obs = observations_of(env, 1)[0];
  Network<float> net(NetworkConfig{0, {16, 16}, 0});
  Rng rng(10);
  net.init(rng);
  std::vector<float> ms, grad;
  TrainConfig cfg;
  cfg.entropy_weight = 0.003;
  cfg.batch_size = 1;
  auto state = net.initial_state();
  const int target = static_cast<int>(Action::kRight);
  for (int update = 0; update < 10000; ++update) {
    Unroll<float> u;
    u.observations = {obs};
    auto s = state;
    u.actions = {static_cast<int>(choose_action(net, obs, s, rng, false))};
    u.rewards = {u.actions[0] == target ? 1.0 : 0.0};
    u.terminal = true;
    u.init = state;
    batch_gradient(net, std::span<const Unroll<float>>(&u, 1), cfg, grad);
    rmsprop_step(net.params(), ms, grad, 1e-3, 0.99, 1e-5);
  }
  const auto out = net.forward(Network<float>::encode(std::span<const Observation>(&obs, 1)), state);
  EXPECT_GE(softmax<float>(out.logits.col(0))(target), 0.95f);
}

TEST(ValueHead, ConvergesToZeroOnRewardlessWaitRollouts) {
  const TrainEnv env = mini_chain();
  const auto obs = observations_of(env, 40);
  Network<float> net(NetworkConfig{0, {16, 16}, 0});
  Rng rng(11);
  net.init(rng);
  std::vector<float> ms, grad;
  TrainConfig cfg;
  for (int update = 0; update < 3000; ++update) {
    Unroll<float> u;
    u.observations = obs;
    u.actions.assign(obs.size(), static_cast<int>(Action::kWait));
    u.rewards.assign(obs.size(), 0.0);
    u.terminal = true;
    u.init = net.initial_state();
    batch_gradient(net, std::span<const Unroll<float>>(&u, 1), cfg, grad);
    rmsprop_step(net.params(), ms, grad, 1e-3, 0.99, 1e-5);
  }
  const auto out = net.forward(Network<float>::encode(obs), net.initial_state());
  EXPECT_LT(out.values.cwiseAbs().maxCoeff(), 1e-2f);
}

TEST(Network, NonFiniteParametersRaiseDivergedLoss) {
  Network<float> net(NetworkConfig{0, {8}, 0});
  Rng rng(1);
  net.init(rng);
  net.params()[0] = std::numeric_limits<float>::quiet_NaN();
  const auto obs = observations_of(mini_chain(), 1);
  std::vector<Observation> lit = obs;
  lit[0].fill(255);
  EXPECT_EQ(code_of([&] { net.forward(Network<float>::encode(lit), net.initial_state()); }),
            ErrorCode::kDivergedLoss);
}

// ---------------------------------------------------------------------------
// Checkpoints and evaluation

TEST(Checkpoint, RoundTripsParametersAndHash) {
  for (const NetworkConfig& net : {NetworkConfig{0, {16, 16}, 0}, NetworkConfig::fidelity()}) {
    const Population pop = make_population(3, 2, net, 5);
    std::stringstream buf;
    save_checkpoint(buf, pop, "abc123");
    const Checkpoint ck = load_checkpoint(buf);
    EXPECT_EQ(ck.config_hash, "abc123");
    EXPECT_EQ(ck.population.match_size, 2);
    ASSERT_EQ(ck.population.size(), 3);
    for (int k = 0; k < 3; ++k) {
      EXPECT_EQ(ck.population.members[k].net.config(), net);
      EXPECT_EQ(ck.population.members[k].net.params(), pop.members[k].net.params());
    }
  }
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const Population pop = make_population(2, 2, NetworkConfig{0, {8}, 0}, 5);
  std::stringstream buf;
  save_checkpoint(buf, pop, "h");
  const std::string good = buf.str();
  for (const std::string& bad : {std::string("nope"), good.substr(0, good.size() - 3),
                                 std::string("SCCK") + std::string(4, '\x07') + good.substr(8)}) {
    std::istringstream in(bad);
    EXPECT_EQ(code_of([&] { load_checkpoint(in); }), ErrorCode::kCheckpointFormat);
  }
  EXPECT_EQ(code_of([] { load_checkpoint_file("/nonexistent/ck.bin"); }),
            ErrorCode::kCheckpointFormat);
}

TEST(Evaluate, IsDeterministicAndFrozen) {
  const TrainEnv env = mini_chain();
  const Population pop = make_population(4, 2, NetworkConfig{0, {16, 16}, 0}, 8);
  const auto a = evaluate(pop, env, AssignmentMode::kRandom, 6, 3);
  const auto b = evaluate(pop, env, AssignmentMode::kRandom, 6, 3, false, 1);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t e = 0; e < a.size(); ++e) {
    EXPECT_EQ(a[e].group_reward, b[e].group_reward);
    EXPECT_EQ(a[e].care_raw, b[e].care_raw);
  }
  const Population again = make_population(4, 2, NetworkConfig{0, {16, 16}, 0}, 8);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(pop.members[k].net.params(), again.members[k].net.params());
}

TEST(Evaluate, WaitPoliciesEarnNothing) {
  const TrainEnv env = mini_chain();
  auto w1 = make_scripted_policy("wait");
  auto w2 = make_scripted_policy("wait");
  std::vector<Policy*> ptrs{w1.get(), w2.get()};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EpisodeSetup setup;
    setup.scene = env.scene;
    setup.assignment = {1, 2};
    setup.params = env.params;
    setup.seed = seed;
    EXPECT_EQ(aggregate(run_episode(setup, ptrs), env.scene->topology()).group_reward, 0);
  }
}

}  // namespace
}  // namespace supplychain
