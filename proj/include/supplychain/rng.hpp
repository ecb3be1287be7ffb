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

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace supplychain {

/// SplitMix64 finalizer. Used both as a sequential generator and as the
/// mixing function for keyed draws.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` of `master`. Distinct indices give
/// statistically independent streams; the rule is stable across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Named random streams of an episode. Each random decision in the
/// simulator is a pure function of (episode seed, stream, step, entity), so
/// the outcome never depends on the order in which decisions are evaluated.
enum class Stream : std::uint64_t {
  kSpawn = 1,
  kBreak = 2,
  kSelfRepair = 3,
  kBranch = 4,
  kMerge = 5,
  kMoveConflict = 6,
  kPolicy = 7,
};

constexpr std::uint64_t keyed_bits(std::uint64_t seed, Stream stream,
                                   std::uint64_t step, std::uint64_t entity) {
  std::uint64_t h = mix64(seed ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ step);
  return mix64(h ^ (entity * 0x8cb92ba72f3d8dd7ULL));
}

constexpr double keyed_uniform(std::uint64_t seed, Stream stream,
                               std::uint64_t step, std::uint64_t entity) {
  return to_unit_interval(keyed_bits(seed, stream, step, entity));
}

/// Uniform integer in [0, n) from keyed bits (Lemire multiply-shift; the
/// bias is below 2^-32 for the small n used here).
constexpr std::uint64_t keyed_index(std::uint64_t seed, Stream stream,
                                    std::uint64_t step, std::uint64_t entity,
                                    std::uint64_t n) {
  const auto bits = keyed_bits(seed, stream, step, entity) >> 32;
  return (bits * n) >> 32;
}

/// Sequential SplitMix64 generator for everything outside the step
/// dynamics: match sampling, weight initialization, action sampling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t out = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

  double uniform() { return to_unit_interval(next()); }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace supplychain
