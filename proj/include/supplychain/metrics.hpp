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

// Social-outcome metrics computed from episode logs.
//
// Agents are identified by the center they operate: row i of the care
// matrix is the agent at center i, column j the agent at center j.

#pragma once

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "supplychain/episode.hpp"
#include "supplychain/topology.hpp"

namespace supplychain {

using Matrix = Eigen::MatrixXd;

enum class MatrixNorm { kFrobenius, kSpectral };

struct MatrixDecomposition {
  Matrix sym;   // (C + C^T) / 2
  Matrix anti;  // (C - C^T) / 2
};

inline MatrixDecomposition decompose(const Matrix& c) {
  if (c.rows() != c.cols()) fail(ErrorCode::kDimensionMismatch, "care matrix must be square");
  MatrixDecomposition d;
  d.sym = 0.5 * (c + c.transpose());
  d.anti = 0.5 * (c - c.transpose());
  return d;
}

inline double matrix_norm(const Matrix& m, MatrixNorm norm) {
  if (m.size() == 0) return 0.0;
  if (norm == MatrixNorm::kFrobenius) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Care reciprocity: (|C_sym| - |C_anti|) / (|C_sym| + |C_anti|), 0 for the
/// zero matrix.
inline double reciprocity(const Matrix& c, MatrixNorm norm = MatrixNorm::kFrobenius) {
  if ((c.array() < 0.0).any()) fail(ErrorCode::kNegativeEntry, "care matrix has a negative entry");
  const MatrixDecomposition d = decompose(c);
  const double ns = matrix_norm(d.sym, norm);
  const double na = matrix_norm(d.anti, norm);
  if (ns + na == 0.0) return 0.0;
  return (ns - na) / (ns + na);
}

/// Care direction: +1 when all care flows to upstream partners, -1 when it
/// all flows downstream, 0 without care.
inline double care_direction(const Matrix& c, const Topology& t) {
  const int n = t.num_centers();
  if (c.rows() != n || c.cols() != n) {
    fail(ErrorCode::kDimensionMismatch, "care matrix is " + std::to_string(c.rows()) + "x" +
                                            std::to_string(c.cols()) + ", topology has " +
                                            std::to_string(n) + " centers");
  }
  if ((c.array() < 0.0).any()) fail(ErrorCode::kNegativeEntry, "care matrix has a negative entry");
  double num = 0.0;
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const double v = c(i - 1, j - 1);
      total += v;
      if (t.reaches(j, i)) num += v;
      if (t.reaches(i, j)) num -= v;
    }
  }
  return total == 0.0 ? 0.0 : num / total;
}

struct SocialMetrics {
  int num_centers = 0;
  std::vector<long long> rewards;     // R^i, index i - 1
  std::vector<long long> breakages;   // B^i
  Matrix care_raw;                    // C^{ij}
  Matrix care_norm;                   // C^{ij} / sum_i B^i
  std::vector<double> care_given;     // C^i = sum_j C^{ij}
  double reciprocity = 0.0;
  double direction = 0.0;
  double efficiency = 0.0;
  long long group_reward = 0;
  long long spawned = 0;
  long long sank = 0;
  long long discarded = 0;
  long long self_repairs = 0;

  double total_care() const { return care_raw.sum(); }
  double care_per_agent() const {
    return num_centers == 0 ? 0.0 : total_care() / num_centers;
  }
};

struct AggregateOptions {
  MatrixNorm norm = MatrixNorm::kFrobenius;
  /// Only steps t with first_step <= t < last_step contribute; the default
  /// covers the whole episode.
  int first_step = 0;
  int last_step = std::numeric_limits<int>::max();
};

inline double efficiency(long long sank, long long spawned) {
  return spawned == 0 ? 0.0 : static_cast<double>(sank) / static_cast<double>(spawned);
}

inline SocialMetrics aggregate(const EpisodeLog& log, const Topology& t,
                               const AggregateOptions& opts = {}) {
  if (!log.complete()) {
    fail(ErrorCode::kTruncatedLog, "log holds " + std::to_string(log.steps.size()) + " of " +
                                       std::to_string(log.header.episode_length) +
                                       " steps or lacks its footer");
  }
  const int n = t.num_centers();
  if (log.header.num_centers != n) {
    fail(ErrorCode::kDimensionMismatch, "log and topology disagree on the number of centers");
  }
  SocialMetrics m;
  m.num_centers = n;
  m.rewards.assign(n, 0);
  m.breakages.assign(n, 0);
  m.care_raw = Matrix::Zero(n, n);
  auto check = [&](int c) {
    if (c < 1 || c > n) fail(ErrorCode::kLogParse, "center index out of range in log");
  };
  for (const StepRecord& r : log.steps) {
    if (r.t < opts.first_step || r.t >= opts.last_step) continue;
    for (int c : r.events.processed) {
      check(c);
      ++m.rewards[c - 1];
    }
    for (int c : r.events.broke) {
      check(c);
      ++m.breakages[c - 1];
    }
    for (const CareEvent& e : r.events.repaired) {
      check(e.carer);
      check(e.owner);
      m.care_raw(e.carer - 1, e.owner - 1) += 1.0;
    }
    m.self_repairs += static_cast<long long>(r.events.self_repaired.size());
    m.spawned += r.events.spawned_total();
    m.sank += r.events.sank;
    m.discarded += r.events.discarded;
  }
  long long total_breaks = 0;
  for (int i = 0; i < n; ++i) {
    m.group_reward += m.rewards[i];
    total_breaks += m.breakages[i];
  }
  m.care_norm = total_breaks == 0 ? Matrix(Matrix::Zero(n, n))
                                  : Matrix(m.care_raw / static_cast<double>(total_breaks));
  m.care_given.assign(n, 0.0);
  for (int i = 0; i < n; ++i) m.care_given[i] = m.care_raw.row(i).sum();
  m.reciprocity = reciprocity(m.care_raw, opts.norm);
  m.direction = care_direction(m.care_raw, t);
  m.efficiency = efficiency(m.sank, m.spawned);
  return m;
}

// ---------------------------------------------------------------------------
// Averages over runs

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * standard error
  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
};

/// Mean and normal-approximation 95% interval. The standard error uses the
/// population standard deviation divided by sqrt(n).
inline MeanCi mean_ci(std::span<const double> values) {
  const auto n = values.size();
  if (n < 2) fail(ErrorCode::kTooFewRuns, "at least two runs are needed for an interval");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(n))};
}

/// True when the two intervals do not overlap.
inline bool separated(const MeanCi& a, const MeanCi& b) { return a.hi() < b.lo() || b.hi() < a.lo(); }

struct MetricsSummary {
  int runs = 0;
  MeanCi group_reward;
  MeanCi total_care;
  MeanCi care_per_agent;
  MeanCi reciprocity;
  MeanCi direction;
  MeanCi efficiency;
  Matrix care_norm;  // mean of the per-run normalized matrices
  Matrix care_raw;   // mean of the raw matrices
};

inline MetricsSummary average_metrics(std::span<const SocialMetrics> runs) {
  if (runs.size() < 2) fail(ErrorCode::kTooFewRuns, "at least two runs are needed for an interval");
  const int n = runs.front().num_centers;
  MetricsSummary s;
  s.runs = static_cast<int>(runs.size());
  auto field = [&](auto get) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const SocialMetrics& r : runs) v.push_back(static_cast<double>(get(r)));
    return mean_ci(v);
  };
  s.group_reward = field([](const SocialMetrics& r) { return r.group_reward; });
  s.total_care = field([](const SocialMetrics& r) { return r.total_care(); });
  s.care_per_agent = field([](const SocialMetrics& r) { return r.care_per_agent(); });
  s.reciprocity = field([](const SocialMetrics& r) { return r.reciprocity; });
  s.direction = field([](const SocialMetrics& r) { return r.direction; });
  s.efficiency = field([](const SocialMetrics& r) { return r.efficiency; });
  s.care_norm = Matrix::Zero(n, n);
  s.care_raw = Matrix::Zero(n, n);
  for (const SocialMetrics& r : runs) {
    if (r.num_centers != n) fail(ErrorCode::kDimensionMismatch, "runs differ in center count");
    s.care_norm += r.care_norm;
    s.care_raw += r.care_raw;
  }
  s.care_norm /= static_cast<double>(runs.size());
  s.care_raw /= static_cast<double>(runs.size());
  return s;
}

// ---------------------------------------------------------------------------
// Export

inline constexpr std::string_view kMetricsSchema = "# supplychain-metrics v1";
inline constexpr std::string_view kCareSchema = "# supplychain-care-matrix v1";

/// Shortest round-trippable decimal form; identical bits give identical text.
inline std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void write_care_csv(std::ostream& out, const Matrix& c) {
  out << kCareSchema << '\n' << "carer";
  for (int j = 1; j <= c.cols(); ++j) out << ',' << j;
  out << '\n';
  for (int i = 0; i < c.rows(); ++i) {
    out << i + 1;
    for (int j = 0; j < c.cols(); ++j) out << ',' << format_number(c(i, j));
    out << '\n';
  }
}

/// Text heatmap with entries below 0.01 left blank.
inline std::string care_heatmap(const Matrix& c) {
  std::ostringstream os;
  os << "     ";
  for (int j = 1; j <= c.cols(); ++j) os << std::setw(6) << j;
  os << '\n';
  for (int i = 0; i < c.rows(); ++i) {
    os << std::setw(5) << i + 1;
    for (int j = 0; j < c.cols(); ++j) {
      if (c(i, j) < 0.01) {
        os << std::setw(6) << "";
      } else {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << c(i, j);
        os << std::setw(6) << cell.str();
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace supplychain
