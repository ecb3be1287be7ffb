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

// Policy/value network with hand-written backpropagation.
//
//   observation (13x13x3, scaled to [0,1])
//     -> optional 1x1 convolution + ReLU
//     -> fully connected ReLU layers
//     -> optional LSTM cell
//     -> policy logits (5) and value (1)
//
// Parameters live in one flat vector so optimizers, checkpoints and
// finite-difference checks treat them uniformly. The scalar type is a
// template parameter: float for training, double for gradient checks.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "supplychain/engine.hpp"
#include "supplychain/error.hpp"
#include "supplychain/rng.hpp"

namespace supplychain {

struct NetworkConfig {
  int conv_channels = 0;  // 0: no convolutional encoder
  std::vector<int> hidden{64, 64};
  int lstm_size = 0;  // 0: feedforward

  /// Small feedforward default used for desk-scale runs.
  static NetworkConfig desk() { return {}; }
  /// Closer to the published agent: 6-channel 1x1 convolution, two 64-unit
  /// layers and a 128-unit LSTM.
  static NetworkConfig fidelity() { return {6, {64, 64}, 128}; }

  bool operator==(const NetworkConfig&) const = default;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["conv_channels"] = conv_channels;
    j["hidden"] = hidden;
    j["lstm_size"] = lstm_size;
    return j;
  }

  static NetworkConfig from_json(const nlohmann::ordered_json& j) {
    NetworkConfig c;
    c.conv_channels = j.value("conv_channels", 0);
    c.hidden = j.value("hidden", std::vector<int>{64, 64});
    c.lstm_size = j.value("lstm_size", 0);
    return c;
  }
};

inline constexpr int kObsPixels = kObsSize * kObsSize;

template <typename S>
class Network {
 public:
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using MatMap = Eigen::Map<Mat>;
  using CMatMap = Eigen::Map<const Mat>;
  using CVecMap = Eigen::Map<const Vec>;

  struct Recurrent {
    Vec h;
    Vec c;
  };

  struct Output {
    Mat logits;  // kNumActions x T
    Vec values;  // T
    Recurrent final;
  };

  /// Activations kept for the backward pass.
  struct Cache {
    Mat input;                 // kObsLength x T
    Mat conv;                  // post-ReLU, (pixels * channels) x T
    std::vector<Mat> layers;   // post-ReLU outputs of the dense layers
    Mat gates;                 // 4H x T, activated [i, f, g, o]
    Mat cells;                 // H x T
    Mat hiddens;               // H x T
    Recurrent init;
    Mat features;              // F x T
  };

  Network() : Network(NetworkConfig::desk()) {}

  explicit Network(NetworkConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.conv_channels < 0 || cfg_.lstm_size < 0 || cfg_.hidden.empty()) {
      fail(ErrorCode::kShapeMismatch, "invalid network configuration");
    }
    std::size_t off = 0;
    auto add = [&](int rows, int cols) {
      if (rows <= 0 || cols <= 0) fail(ErrorCode::kShapeMismatch, "layer sizes must be positive");
      Block b{off, rows, cols};
      off += static_cast<std::size_t>(rows) * cols;
      return b;
    };
    int in = kObsLength;
    if (cfg_.conv_channels > 0) {
      conv_w_ = add(cfg_.conv_channels, kObsChannels);
      conv_b_ = add(cfg_.conv_channels, 1);
      in = kObsPixels * cfg_.conv_channels;
    }
    for (int h : cfg_.hidden) {
      dense_w_.push_back(add(h, in));
      dense_b_.push_back(add(h, 1));
      in = h;
    }
    if (cfg_.lstm_size > 0) {
      const int h = cfg_.lstm_size;
      lstm_wx_ = add(4 * h, in);
      lstm_wh_ = add(4 * h, h);
      lstm_b_ = add(4 * h, 1);
      in = h;
    }
    features_ = in;
    pol_w_ = add(kNumActions, in);
    pol_b_ = add(kNumActions, 1);
    val_w_ = add(1, in);
    val_b_ = add(1, 1);
    params_.assign(off, S(0));
  }

  const NetworkConfig& config() const { return cfg_; }
  std::size_t num_params() const { return params_.size(); }
  std::vector<S>& params() { return params_; }
  const std::vector<S>& params() const { return params_; }
  bool recurrent() const { return cfg_.lstm_size > 0; }
  int num_features() const { return features_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, a
  /// shrunken policy head so the initial policy is close to uniform, and
  /// forget-gate bias 1.
  void init(Rng& rng) {
    auto fill = [&](const Block& b, double scale) {
      const double bound = scale / std::sqrt(static_cast<double>(b.cols));
      for (std::size_t k = 0; k < b.size(); ++k) {
        params_[b.off + k] = static_cast<S>((2.0 * rng.uniform() - 1.0) * bound);
      }
    };
    auto zero = [&](const Block& b) {
      for (std::size_t k = 0; k < b.size(); ++k) params_[b.off + k] = S(0);
    };
    if (cfg_.conv_channels > 0) {
      fill(conv_w_, 1.0);
      zero(conv_b_);
    }
    for (std::size_t l = 0; l < dense_w_.size(); ++l) {
      fill(dense_w_[l], 1.0);
      zero(dense_b_[l]);
    }
    if (recurrent()) {
      fill(lstm_wx_, 1.0);
      fill(lstm_wh_, 1.0);
      zero(lstm_b_);
      const int h = cfg_.lstm_size;
      for (int k = h; k < 2 * h; ++k) params_[lstm_b_.off + k] = S(1);
    }
    fill(pol_w_, 0.01);
    zero(pol_b_);
    fill(val_w_, 1.0);
    zero(val_b_);
  }

  Recurrent initial_state() const {
    Recurrent r;
    if (recurrent()) {
      r.h = Vec::Zero(cfg_.lstm_size);
      r.c = Vec::Zero(cfg_.lstm_size);
    }
    return r;
  }

  /// Observations as network input, one column per step.
  static Mat encode(std::span<const Observation> obs) {
    Mat x(kObsLength, static_cast<Eigen::Index>(obs.size()));
    for (std::size_t t = 0; t < obs.size(); ++t) {
      for (int k = 0; k < kObsLength; ++k) x(k, static_cast<Eigen::Index>(t)) = S(obs[t][k]) / S(255);
    }
    return x;
  }

  /// Runs T consecutive steps starting from `init`. When `cache` is given,
  /// it receives everything backward() needs.
  Output forward(const Mat& x, const Recurrent& init, Cache* cache = nullptr) const {
    if (x.rows() != kObsLength) {
      fail(ErrorCode::kShapeMismatch, "expected " + std::to_string(kObsLength) +
                                          " inputs per step, got " + std::to_string(x.rows()));
    }
    const Eigen::Index T = x.cols();
    Mat a;
    Mat conv;
    if (cfg_.conv_channels > 0) {
      const int ch = cfg_.conv_channels;
      CMatMap pixels(x.data(), kObsChannels, kObsPixels * T);
      Mat z = (map(conv_w_) * pixels).colwise() + vec(conv_b_);
      z = z.cwiseMax(S(0));
      conv = Eigen::Map<Mat>(z.data(), kObsPixels * ch, T);
      a = conv;
    } else {
      a = x;
    }
    std::vector<Mat> layers;
    for (std::size_t l = 0; l < dense_w_.size(); ++l) {
      Mat z = (map(dense_w_[l]) * a).colwise() + vec(dense_b_[l]);
      a = z.cwiseMax(S(0));
      layers.push_back(a);
    }
    Recurrent final;
    Mat gates, cells, hiddens;
    if (recurrent()) {
      const int h = cfg_.lstm_size;
      check_state(init);
      Mat zx = (map(lstm_wx_) * a).colwise() + vec(lstm_b_);
      gates.resize(4 * h, T);
      cells.resize(h, T);
      hiddens.resize(h, T);
      Vec hp = init.h;
      Vec cp = init.c;
      for (Eigen::Index t = 0; t < T; ++t) {
        Vec z = zx.col(t) + map(lstm_wh_) * hp;
        Vec g(4 * h);
        for (int k = 0; k < h; ++k) {
          g(k) = sigmoid(z(k));
          g(h + k) = sigmoid(z(h + k));
          g(2 * h + k) = std::tanh(z(2 * h + k));
          g(3 * h + k) = sigmoid(z(3 * h + k));
        }
        cp = g.segment(h, h).cwiseProduct(cp) + g.segment(0, h).cwiseProduct(g.segment(2 * h, h));
        hp = g.segment(3 * h, h).cwiseProduct(cp.unaryExpr([](S v) { return std::tanh(v); }));
        gates.col(t) = g;
        cells.col(t) = cp;
        hiddens.col(t) = hp;
      }
      final.h = hp;
      final.c = cp;
      a = hiddens;
    }
    Output out;
    out.logits = (map(pol_w_) * a).colwise() + vec(pol_b_);
    out.values = ((map(val_w_) * a).array() + params_[val_b_.off]).matrix().transpose();
    out.final = std::move(final);
    for (Eigen::Index t = 0; t < T; ++t) {
      if (!out.logits.col(t).allFinite() || !std::isfinite(static_cast<double>(out.values(t)))) {
        fail(ErrorCode::kDivergedLoss, "network produced a non-finite output");
      }
    }
    if (cache) {
      cache->input = x;
      cache->conv = std::move(conv);
      cache->layers = std::move(layers);
      cache->gates = std::move(gates);
      cache->cells = std::move(cells);
      cache->hiddens = std::move(hiddens);
      cache->init = init;
      cache->features = a;
    }
    return out;
  }

  /// Adds d(loss)/d(params) to `grad`, given the loss gradient with respect
  /// to the logits and values of every step of a cached forward pass.
  void backward(const Cache& cache, const Mat& dlogits, const Vec& dvalues,
                std::vector<S>& grad) const {
    if (grad.size() != params_.size()) grad.assign(params_.size(), S(0));
    const Eigen::Index T = cache.features.cols();
    if (dlogits.rows() != kNumActions || dlogits.cols() != T || dvalues.size() != T) {
      fail(ErrorCode::kShapeMismatch, "gradient shape does not match the cached pass");
    }
    const Mat& f = cache.features;
    gmap(grad, pol_w_) += dlogits * f.transpose();
    gvec(grad, pol_b_) += dlogits.rowwise().sum();
    gmap(grad, val_w_) += dvalues.transpose() * f.transpose();
    grad[val_b_.off] += dvalues.sum();
    Mat da = map(pol_w_).transpose() * dlogits + map(val_w_).transpose() * dvalues.transpose();

    if (recurrent()) {
      const int h = cfg_.lstm_size;
      const Mat& below = cache.layers.back();
      Mat dzx(4 * h, T);
      Vec dh_next = Vec::Zero(h);
      Vec dc_next = Vec::Zero(h);
      for (Eigen::Index t = T - 1; t >= 0; --t) {
        const auto g = cache.gates.col(t);
        const Vec c = cache.cells.col(t);
        const Vec c_prev = t > 0 ? Vec(cache.cells.col(t - 1)) : cache.init.c;
        const Vec h_prev = t > 0 ? Vec(cache.hiddens.col(t - 1)) : cache.init.h;
        const Vec dh = da.col(t) + dh_next;
        Vec dz(4 * h);
        Vec dc = dc_next;
        for (int k = 0; k < h; ++k) {
          const S ig = g(k), fg = g(h + k), gg = g(2 * h + k), og = g(3 * h + k);
          const S tc = std::tanh(c(k));
          dc(k) += dh(k) * og * (S(1) - tc * tc);
          dz(k) = dc(k) * gg * ig * (S(1) - ig);
          dz(h + k) = dc(k) * c_prev(k) * fg * (S(1) - fg);
          dz(2 * h + k) = dc(k) * ig * (S(1) - gg * gg);
          dz(3 * h + k) = dh(k) * tc * og * (S(1) - og);
          dc(k) *= fg;
        }
        dc_next = dc;
        gmap(grad, lstm_wh_) += dz * h_prev.transpose();
        dh_next = map(lstm_wh_).transpose() * dz;
        dzx.col(t) = dz;
      }
      gmap(grad, lstm_wx_) += dzx * below.transpose();
      gvec(grad, lstm_b_) += dzx.rowwise().sum();
      da = map(lstm_wx_).transpose() * dzx;
    }

    for (std::size_t l = dense_w_.size(); l-- > 0;) {
      const Mat& out = cache.layers[l];
      const Mat& in = l > 0 ? cache.layers[l - 1]
                            : (cfg_.conv_channels > 0 ? cache.conv : cache.input);
      const Mat dz = da.cwiseProduct((out.array() > S(0)).template cast<S>().matrix());
      gmap(grad, dense_w_[l]) += dz * in.transpose();
      gvec(grad, dense_b_[l]) += dz.rowwise().sum();
      if (l > 0 || cfg_.conv_channels > 0) da = map(dense_w_[l]).transpose() * dz;
    }

    if (cfg_.conv_channels > 0) {
      const int ch = cfg_.conv_channels;
      Mat dz = da.cwiseProduct((cache.conv.array() > S(0)).template cast<S>().matrix());
      Eigen::Map<const Mat> dz_px(dz.data(), ch, kObsPixels * T);
      CMatMap pixels(cache.input.data(), kObsChannels, kObsPixels * T);
      gmap(grad, conv_w_) += dz_px * pixels.transpose();
      gvec(grad, conv_b_) += dz_px.rowwise().sum();
    }
  }

 private:
  struct Block {
    std::size_t off = 0;
    int rows = 0;
    int cols = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  };

  static S sigmoid(S v) { return S(1) / (S(1) + std::exp(-v)); }

  CMatMap map(const Block& b) const { return CMatMap(params_.data() + b.off, b.rows, b.cols); }
  CVecMap vec(const Block& b) const { return CVecMap(params_.data() + b.off, b.rows); }
  static MatMap gmap(std::vector<S>& g, const Block& b) { return MatMap(g.data() + b.off, b.rows, b.cols); }
  static Eigen::Map<Vec> gvec(std::vector<S>& g, const Block& b) {
    return Eigen::Map<Vec>(g.data() + b.off, b.rows);
  }

  void check_state(const Recurrent& r) const {
    if (r.h.size() != cfg_.lstm_size || r.c.size() != cfg_.lstm_size) {
      fail(ErrorCode::kShapeMismatch, "recurrent state has the wrong size");
    }
  }

  NetworkConfig cfg_;
  Block conv_w_, conv_b_;
  std::vector<Block> dense_w_, dense_b_;
  Block lstm_wx_, lstm_wh_, lstm_b_;
  Block pol_w_, pol_b_, val_w_, val_b_;
  int features_ = 0;
  std::vector<S> params_;
};

/// Numerically stable softmax of one logit column.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, 1> softmax(const Eigen::Matrix<S, Eigen::Dynamic, 1>& logits) {
  const S m = logits.maxCoeff();
  Eigen::Matrix<S, Eigen::Dynamic, 1> p = (logits.array() - m).exp().matrix();
  return p / p.sum();
}

}  // namespace supplychain
