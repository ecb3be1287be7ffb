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

// Synchronous advantage actor-critic over a population of independently
// parameterized agents.
//
// Each training round steps `parallel_envs` environments for one unroll.
// Every (environment, slot) pair yields one trajectory for the population
// member in that slot; a member is updated only from its own trajectories,
// in (environment, slot) order, once `batch_size` of them have accumulated.
// Collection only reads parameters and updates happen between rounds, so
// results do not depend on the number of worker threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "supplychain/engine.hpp"
#include "supplychain/episode.hpp"
#include "supplychain/metrics.hpp"
#include "supplychain/network.hpp"
#include "supplychain/parallel.hpp"
#include "supplychain/rng.hpp"

namespace supplychain {

enum class AssignmentMode { kRandom, kFixed };

inline std::string_view assignment_mode_name(AssignmentMode m) {
  return m == AssignmentMode::kRandom ? "random" : "fixed";
}

inline AssignmentMode parse_assignment_mode(std::string_view s) {
  if (s == "random") return AssignmentMode::kRandom;
  if (s == "fixed") return AssignmentMode::kFixed;
  fail(ErrorCode::kConfigParse, "assignment mode must be 'random' or 'fixed', got '" +
                                    std::string(s) + "'");
}

struct Match {
  std::vector<int> agent_ids;   // slot -> population member (1-based)
  std::vector<int> assignment;  // slot -> center (1-based)
  bool operator==(const Match&) const = default;
};

/// Random mode: a uniform subset of `match_size` members, placed on a
/// uniform random bijection to the centers. Fixed mode: members 1..k on
/// centers 1..k, always.
inline Match sample_match(int population_size, int match_size, AssignmentMode mode, Rng& rng) {
  if (match_size < 1 || match_size > population_size) {
    fail(ErrorCode::kInvalidParams, "match size must lie in [1, population size]");
  }
  Match m;
  m.assignment.resize(match_size);
  std::iota(m.assignment.begin(), m.assignment.end(), 1);
  if (mode == AssignmentMode::kFixed) {
    m.agent_ids = m.assignment;
    return m;
  }
  std::vector<int> ids(population_size);
  std::iota(ids.begin(), ids.end(), 1);
  rng.shuffle(std::span<int>(ids));
  m.agent_ids.assign(ids.begin(), ids.begin() + match_size);
  rng.shuffle(std::span<int>(m.assignment));
  return m;
}

struct TrainConfig {
  double discount = 0.99;
  int unroll_length = 100;
  double entropy_weight = 0.003;
  double value_weight = 0.5;
  int batch_size = 16;
  double learning_rate = 4e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-5;
  long long total_steps = 500000;  // environment steps summed over envs
  int parallel_envs = 8;
  int threads = 0;
  int population_size = 8;
  int match_size = 4;
  AssignmentMode assignment_mode = AssignmentMode::kRandom;
  NetworkConfig network;
  long long log_interval = 0;  // environment steps per curve point; 0: total / 20
  bool frozen = false;         // collect only, never update

  void validate() const {
    auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidParams, what); };
    if (!(discount > 0.0 && discount < 1.0)) bad("discount must lie in (0, 1)");
    if (unroll_length < 1) bad("unroll_length must be positive");
    if (batch_size < 1) bad("batch_size must be positive");
    if (learning_rate < 0.0) bad("learning_rate must be non-negative");
    if (entropy_weight < 0.0 || value_weight < 0.0) bad("loss weights must be non-negative");
    if (!(rms_decay > 0.0 && rms_decay < 1.0) || !(rms_epsilon > 0.0)) bad("bad RMSProp settings");
    if (parallel_envs < 1) bad("parallel_envs must be positive");
    if (match_size < 1 || match_size > population_size) bad("match_size must be <= population_size");
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["discount"] = discount;
    j["unroll_length"] = unroll_length;
    j["entropy_weight"] = entropy_weight;
    j["value_weight"] = value_weight;
    j["batch_size"] = batch_size;
    j["learning_rate"] = learning_rate;
    j["rms_decay"] = rms_decay;
    j["rms_epsilon"] = rms_epsilon;
    j["total_steps"] = total_steps;
    j["parallel_envs"] = parallel_envs;
    j["population_size"] = population_size;
    j["match_size"] = match_size;
    j["assignment"] = assignment_mode_name(assignment_mode);
    j["network"] = network.to_json();
    j["log_interval"] = log_interval;
    j["frozen"] = frozen;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Actor-critic loss

/// One trajectory segment of one agent. `observations` has one more entry
/// than `actions` when the segment ended before the episode did; that last
/// observation only feeds the bootstrap value.
template <typename S>
struct Unroll {
  int agent_id = 0;
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> rewards;
  bool terminal = false;
  typename Network<S>::Recurrent init;

  int length() const { return static_cast<int>(actions.size()); }
};

/// Returns and advantages held fixed while differentiating.
struct Targets {
  std::vector<double> returns;
  std::vector<double> advantages;
};

struct LossStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;  // summed over steps
  int steps = 0;
};

template <typename S>
Targets compute_targets(const Network<S>& net, const Unroll<S>& u, double discount) {
  const auto x = Network<S>::encode(u.observations);
  const auto out = net.forward(x, u.init);
  const int T = u.length();
  Targets tg;
  tg.returns.resize(T);
  tg.advantages.resize(T);
  double g = (!u.terminal && static_cast<int>(u.observations.size()) > T)
                 ? static_cast<double>(out.values(T))
                 : 0.0;
  for (int t = T - 1; t >= 0; --t) {
    g = u.rewards[t] + discount * g;
    tg.returns[t] = g;
    tg.advantages[t] = g - static_cast<double>(out.values(t));
  }
  return tg;
}

/// Actor-critic loss of one unroll, scaled by 1 / `norm`:
///   sum_t [ -A_t log pi(a_t) - entropy_weight * H(pi_t)
///           + value_weight * (V_t - G_t)^2 / 2 ]
/// Adds its gradient to `grad` when non-null.
template <typename S>
LossStats a2c_loss(const Network<S>& net, const Unroll<S>& u, const Targets& tg,
                   double entropy_weight, double value_weight, double norm,
                   std::vector<S>* grad) {
  using Mat = typename Network<S>::Mat;
  using Vec = typename Network<S>::Vec;
  const int T = u.length();
  typename Network<S>::Cache cache;
  const auto x = Network<S>::encode(u.observations);
  const auto out = net.forward(x, u.init, grad ? &cache : nullptr);
  const Eigen::Index cols = x.cols();
  Mat dlogits = Mat::Zero(kNumActions, cols);
  Vec dvalues = Vec::Zero(cols);
  LossStats st;
  st.steps = T;
  for (int t = 0; t < T; ++t) {
    const Vec p = softmax<S>(out.logits.col(t));
    double h = 0.0;
    for (int k = 0; k < kNumActions; ++k) {
      const double pk = static_cast<double>(p(k));
      if (pk > 0.0) h -= pk * std::log(pk);
    }
    const int a = u.actions[t];
    const double logp = static_cast<double>(out.logits(a, t)) -
                        static_cast<double>(out.logits.col(t).maxCoeff()) -
                        std::log(static_cast<double>(
                            (out.logits.col(t).array() - out.logits.col(t).maxCoeff()).exp().sum()));
    const double adv = tg.advantages[t];
    const double diff = static_cast<double>(out.values(t)) - tg.returns[t];
    st.policy_loss += -adv * logp / norm;
    st.value_loss += value_weight * 0.5 * diff * diff / norm;
    st.entropy += h;
    for (int k = 0; k < kNumActions; ++k) {
      const double pk = static_cast<double>(p(k));
      const double logpk = std::log(std::max(pk, 1e-300));
      double d = -adv * ((k == a ? 1.0 : 0.0) - pk);
      d += entropy_weight * pk * (logpk + h);
      dlogits(k, t) = static_cast<S>(d / norm);
    }
    dvalues(t) = static_cast<S>(value_weight * diff / norm);
  }
  st.loss = st.policy_loss + st.value_loss - entropy_weight * st.entropy / norm;
  if (!std::isfinite(st.loss)) fail(ErrorCode::kDivergedLoss, "non-finite actor-critic loss");
  if (grad) net.backward(cache, dlogits, dvalues, *grad);
  return st;
}

/// RMSProp with the epsilon inside the square root.
template <typename S>
void rmsprop_step(std::vector<S>& params, std::vector<S>& mean_square, const std::vector<S>& grad,
                  double lr, double decay, double eps) {
  if (mean_square.size() != params.size()) mean_square.assign(params.size(), S(0));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = static_cast<double>(grad[k]);
    const double ms = decay * static_cast<double>(mean_square[k]) + (1.0 - decay) * g * g;
    mean_square[k] = static_cast<S>(ms);
    params[k] = static_cast<S>(static_cast<double>(params[k]) - lr * g / std::sqrt(ms + eps));
  }
}

/// Gradient of the summed batch loss; unrolls are visited in order.
template <typename S>
LossStats batch_gradient(const Network<S>& net, std::span<const Unroll<S>> batch,
                         const TrainConfig& cfg, std::vector<S>& grad) {
  grad.assign(net.num_params(), S(0));
  double norm = 0.0;
  for (const auto& u : batch) norm += u.length();
  LossStats total;
  if (norm == 0.0) return total;
  for (const auto& u : batch) {
    const Targets tg = compute_targets(net, u, cfg.discount);
    const LossStats st = a2c_loss(net, u, tg, cfg.entropy_weight, cfg.value_weight, norm, &grad);
    total.loss += st.loss;
    total.policy_loss += st.policy_loss;
    total.value_loss += st.value_loss;
    total.entropy += st.entropy;
    total.steps += st.steps;
  }
  for (const S g : grad) {
    if (!std::isfinite(static_cast<double>(g))) {
      fail(ErrorCode::kDivergedLoss, "non-finite gradient");
    }
  }
  return total;
}

template <typename S>
double policy_entropy(const Network<S>& net, std::span<const Observation> obs,
                      const typename Network<S>::Recurrent& init) {
  if (obs.empty()) return 0.0;
  const auto out = net.forward(Network<S>::encode(obs), init);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < out.logits.cols(); ++t) {
    const auto p = softmax<S>(out.logits.col(t));
    for (int k = 0; k < kNumActions; ++k) {
      const double pk = static_cast<double>(p(k));
      if (pk > 0.0) sum -= pk * std::log(pk);
    }
  }
  return sum / static_cast<double>(out.logits.cols());
}

// ---------------------------------------------------------------------------
// Population

struct Member {
  Network<float> net;
  std::vector<float> mean_square;
  long long updates = 0;
};

struct Population {
  int match_size = 4;
  std::vector<Member> members;

  int size() const { return static_cast<int>(members.size()); }
  Member& member(int agent_id) { return members.at(agent_id - 1); }
  const Member& member(int agent_id) const { return members.at(agent_id - 1); }
};

inline Population make_population(int size, int match_size, const NetworkConfig& net,
                                  std::uint64_t seed) {
  Population p;
  p.match_size = match_size;
  for (int k = 0; k < size; ++k) {
    Member m{Network<float>(net), {}, 0};
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    m.net.init(rng);
    p.members.push_back(std::move(m));
  }
  return p;
}

/// Samples an action from the network's policy (or takes the arg-max).
inline Action choose_action(const Network<float>& net, const Observation& obs,
                            Network<float>::Recurrent& state, Rng& rng, bool greedy,
                            float* value = nullptr) {
  const auto out = net.forward(Network<float>::encode(std::span<const Observation>(&obs, 1)), state);
  state = out.final;
  if (value) *value = out.values(0);
  const Eigen::VectorXf p = softmax<float>(out.logits.col(0));
  int a = 0;
  if (greedy) {
    p.maxCoeff(&a);
  } else {
    double u = rng.uniform();
    a = kNumActions - 1;
    for (int k = 0; k < kNumActions; ++k) {
      u -= static_cast<double>(p(k));
      if (u < 0.0) {
        a = k;
        break;
      }
    }
  }
  return static_cast<Action>(a);
}

/// A frozen population member acting from its egocentric observation.
class LearnedPolicy : public Policy {
 public:
  LearnedPolicy(const Network<float>* net, int agent_id, bool greedy = false)
      : net_(net), agent_id_(agent_id), greedy_(greedy) {}

  std::string name() const override { return "learned:" + std::to_string(agent_id_); }

  void begin_episode(const WorldState& s, int slot) override {
    state_ = net_->initial_state();
    rng_ = Rng(derive_seed(s.seed ^ 0x6c6561726e6564ULL, static_cast<std::uint64_t>(slot)));
  }

  Action act(const WorldState& s, int slot) override {
    return choose_action(*net_, observe(s, slot), state_, rng_, greedy_);
  }

 private:
  const Network<float>* net_;
  int agent_id_;
  bool greedy_;
  Network<float>::Recurrent state_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// Training

struct CurvePoint {
  long long step = 0;
  int episodes = 0;
  double group_reward = 0.0;
  double total_care = 0.0;  // care events per agent per episode
  double reciprocity = 0.0;
  double direction = 0.0;
  double entropy = 0.0;  // mean policy entropy over updates in the interval
};

struct TrainResult {
  Population population;
  std::vector<CurvePoint> curves;
  long long env_steps = 0;
  std::vector<SocialMetrics> episodes;  // every completed training episode
};

struct TrainEnv {
  std::shared_ptr<const Scene> scene;
  EnvParams params;
};

namespace detail {

struct EnvRunner {
  WorldState state;
  Match match;
  std::vector<Network<float>::Recurrent> rec;
  Rng rng;
  EpisodeLog log;
};

inline void reset_runner(EnvRunner& r, const TrainEnv& env, const TrainConfig& cfg,
                         const Population& pop) {
  r.match = sample_match(pop.size(), cfg.match_size, cfg.assignment_mode, r.rng);
  const std::uint64_t seed = r.rng.next();
  r.state = init_episode(env.scene, r.match.assignment, env.params, seed, r.match.agent_ids);
  r.rec.clear();
  for (int id : r.match.agent_ids) r.rec.push_back(pop.member(id).net.initial_state());
  r.log = EpisodeLog{};
  r.log.header.num_centers = env.scene->topology().num_centers();
  r.log.header.episode_length = env.params.episode_length;
  r.log.header.seed = seed;
}

}  // namespace detail

inline void write_curves_csv(std::ostream& out, std::span<const CurvePoint> curves) {
  out << "step,group_reward,total_care,S,D\n";
  for (const CurvePoint& c : curves) {
    out << c.step << ',' << format_number(c.group_reward) << ',' << format_number(c.total_care)
        << ',' << format_number(c.reciprocity) << ',' << format_number(c.direction) << '\n';
  }
}

inline TrainResult train(const TrainEnv& env, const TrainConfig& cfg, std::uint64_t master_seed) {
  cfg.validate();
  const Topology& topo = env.scene->topology();
  if (topo.num_centers() != cfg.match_size) {
    fail(ErrorCode::kInvalidParams, "match_size must equal the number of centers");
  }
  TrainResult res;
  res.population = make_population(cfg.population_size, cfg.match_size, cfg.network,
                                   derive_seed(master_seed, 0x9e37));
  Population& pop = res.population;
  const long long interval = cfg.log_interval > 0 ? cfg.log_interval
                                                  : std::max<long long>(1, cfg.total_steps / 20);

  std::vector<detail::EnvRunner> runners(cfg.parallel_envs);
  for (int e = 0; e < cfg.parallel_envs; ++e) {
    runners[e].rng = Rng(derive_seed(master_seed, 1000 + static_cast<std::uint64_t>(e)));
    detail::reset_runner(runners[e], env, cfg, pop);
  }
  std::vector<std::vector<Unroll<float>>> pending(pop.size());

  // Curve accumulation.
  long long next_point = interval;
  std::vector<SocialMetrics> window;
  double entropy_sum = 0.0;
  long long entropy_steps = 0;
  auto flush_point = [&](long long step) {
    if (window.empty()) return;
    CurvePoint c;
    c.step = step;
    c.episodes = static_cast<int>(window.size());
    for (const SocialMetrics& m : window) {
      c.group_reward += static_cast<double>(m.group_reward);
      c.total_care += m.care_per_agent();
      c.reciprocity += m.reciprocity;
      c.direction += m.direction;
    }
    const double n = static_cast<double>(window.size());
    c.group_reward /= n;
    c.total_care /= n;
    c.reciprocity /= n;
    c.direction /= n;
    c.entropy = entropy_steps > 0 ? entropy_sum / static_cast<double>(entropy_steps) : 0.0;
    res.curves.push_back(c);
    window.clear();
    entropy_sum = 0.0;
    entropy_steps = 0;
  };

  const int slots = cfg.match_size;
  while (res.env_steps < cfg.total_steps) {
    std::vector<std::vector<Unroll<float>>> produced(cfg.parallel_envs);
    std::vector<std::vector<SocialMetrics>> finished(cfg.parallel_envs);
    std::vector<int> steps_taken(cfg.parallel_envs, 0);

    parallel_for(runners.size(), cfg.threads, [&](std::size_t e) {
      detail::EnvRunner& r = runners[e];
      std::vector<Unroll<float>> unrolls(slots);
      for (int s = 0; s < slots; ++s) {
        unrolls[s].agent_id = r.match.agent_ids[s];
        unrolls[s].init = r.rec[s];
      }
      std::vector<Action> actions(slots);
      for (int t = 0; t < cfg.unroll_length; ++t) {
        for (int s = 0; s < slots; ++s) {
          Observation obs = observe(r.state, s);
          actions[s] = choose_action(pop.member(r.match.agent_ids[s]).net, obs, r.rec[s], r.rng,
                                     false);
          unrolls[s].observations.push_back(obs);
          unrolls[s].actions.push_back(static_cast<int>(actions[s]));
        }
        StepRecord rec;
        rec.t = r.state.step;
        rec.actions = actions;
        StepResult sr = step(r.state, actions);
        for (int s = 0; s < slots; ++s) unrolls[s].rewards.push_back(sr.rewards[s]);
        rec.rewards = std::move(sr.rewards);
        rec.events = std::move(sr.events);
        r.log.steps.push_back(std::move(rec));
        ++steps_taken[e];
        if (is_terminal(r.state)) break;
      }
      if (is_terminal(r.state)) {
        for (auto& u : unrolls) u.terminal = true;
        r.log.in_flight_at_end = r.state.units_in_flight();
        finished[e].push_back(aggregate(r.log, topo));
        detail::reset_runner(r, env, cfg, pop);
      } else {
        for (int s = 0; s < slots; ++s) unrolls[s].observations.push_back(observe(r.state, s));
      }
      produced[e] = std::move(unrolls);
    });

    for (int e = 0; e < cfg.parallel_envs; ++e) {
      res.env_steps += steps_taken[e];
      for (auto& m : finished[e]) {
        window.push_back(m);
        res.episodes.push_back(std::move(m));
      }
      for (auto& u : produced[e]) pending[u.agent_id - 1].push_back(std::move(u));
    }

    if (!cfg.frozen) {
      std::vector<LossStats> stats(pop.size());
      parallel_for(static_cast<std::size_t>(pop.size()), cfg.threads, [&](std::size_t k) {
        auto& queue = pending[k];
        Member& m = pop.members[k];
        std::size_t used = 0;
        std::vector<float> grad;
        while (queue.size() - used >= static_cast<std::size_t>(cfg.batch_size)) {
          std::span<const Unroll<float>> batch(queue.data() + used, cfg.batch_size);
          const LossStats st = batch_gradient(m.net, batch, cfg, grad);
          rmsprop_step(m.net.params(), m.mean_square, grad, cfg.learning_rate, cfg.rms_decay,
                       cfg.rms_epsilon);
          ++m.updates;
          stats[k].entropy += st.entropy;
          stats[k].steps += st.steps;
          used += cfg.batch_size;
        }
        queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(used));
      });
      for (const LossStats& st : stats) {
        entropy_sum += st.entropy;
        entropy_steps += st.steps;
      }
    } else {
      for (auto& q : pending) q.clear();
    }

    while (res.env_steps >= next_point) {
      flush_point(next_point);
      next_point += interval;
    }
  }
  flush_point(res.env_steps);
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout (little-endian):
//   "SCCK" | u32 version | u32 n + config hash | u32 n + network json |
//   u32 members | per member: u64 count, count x f32

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) fail(ErrorCode::kCheckpointFormat, "checkpoint ends early");
  return v;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string take_string(std::istream& in) {
  const auto n = take<std::uint32_t>(in);
  if (n > (1u << 24)) fail(ErrorCode::kCheckpointFormat, "implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) fail(ErrorCode::kCheckpointFormat, "checkpoint ends early");
  return s;
}

}  // namespace detail

struct Checkpoint {
  std::string config_hash;
  Population population;
};

inline void save_checkpoint(std::ostream& out, const Population& pop, const std::string& config_hash) {
  out.write("SCCK", 4);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put_string(out, config_hash);
  const NetworkConfig net = pop.members.empty() ? NetworkConfig{} : pop.members[0].net.config();
  nlohmann::ordered_json j = net.to_json();
  j["match_size"] = pop.match_size;
  detail::put_string(out, j.dump());
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(pop.size()));
  for (const Member& m : pop.members) {
    const auto& p = m.net.params();
    detail::put<std::uint64_t>(out, p.size());
    out.write(reinterpret_cast<const char*>(p.data()),
              static_cast<std::streamsize>(p.size() * sizeof(float)));
  }
}

inline Checkpoint load_checkpoint(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SCCK", 4) != 0) {
    fail(ErrorCode::kCheckpointFormat, "not a checkpoint file");
  }
  const auto version = detail::take<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    fail(ErrorCode::kCheckpointFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config_hash = detail::take_string(in);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(detail::take_string(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCheckpointFormat, std::string("bad network description: ") + e.what());
  }
  const NetworkConfig net = NetworkConfig::from_json(j);
  ck.population.match_size = j.value("match_size", 4);
  const auto n = detail::take<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < n; ++k) {
    Member m{Network<float>(net), {}, 0};
    const auto count = detail::take<std::uint64_t>(in);
    if (count != m.net.num_params()) {
      fail(ErrorCode::kCheckpointFormat, "parameter count does not match the network");
    }
    in.read(reinterpret_cast<char*>(m.net.params().data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) fail(ErrorCode::kCheckpointFormat, "checkpoint ends early");
    ck.population.members.push_back(std::move(m));
  }
  return ck;
}

inline void save_checkpoint_file(const std::string& path, const Population& pop,
                                 const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kCheckpointFormat, "cannot write " + path);
  save_checkpoint(out, pop, config_hash);
}

inline Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kCheckpointFormat, "cannot read " + path);
  return load_checkpoint(in);
}

// ---------------------------------------------------------------------------
// Evaluation

/// Frozen evaluation of population members: `episodes` matches sampled as
/// in training, one metrics record per episode.
inline std::vector<SocialMetrics> evaluate(const Population& pop, const TrainEnv& env,
                                           AssignmentMode mode, int episodes,
                                           std::uint64_t master_seed, bool greedy = false,
                                           int threads = 0) {
  std::vector<SocialMetrics> out(static_cast<std::size_t>(episodes));
  parallel_for(out.size(), threads, [&](std::size_t e) {
    Rng rng(derive_seed(master_seed, e));
    const Match match = sample_match(pop.size(), pop.match_size, mode, rng);
    std::vector<std::unique_ptr<Policy>> owned;
    std::vector<Policy*> policies;
    for (int id : match.agent_ids) {
      owned.push_back(std::make_unique<LearnedPolicy>(&pop.member(id).net, id, greedy));
      policies.push_back(owned.back().get());
    }
    EpisodeSetup setup;
    setup.scene = env.scene;
    setup.assignment = match.assignment;
    setup.agent_ids = match.agent_ids;
    setup.params = env.params;
    setup.seed = rng.next();
    const EpisodeLog log = run_episode(setup, policies);
    out[e] = aggregate(log, env.scene->topology());
  });
  return out;
}

}  // namespace supplychain
