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

#include <stdexcept>
#include <string>
#include <string_view>

namespace supplychain {

enum class ErrorCode {
  // topology
  kCycleDetected,
  kUnreachableCenter,
  kSelfLoop,
  kDuplicateEdge,
  kInvalidCenter,
  kNotATree,
  kNegativeCost,
  // layout
  kStyleTopologyMismatch,
  kSpacingTooSmall,
  kMapParse,
  // engine
  kBadAssignment,
  kMapTopologyMismatch,
  kEpisodeOver,
  kBadAction,
  kInvalidParams,
  // metrics
  kTruncatedLog,
  kNegativeEntry,
  kDimensionMismatch,
  kTooFewRuns,
  kLogParse,
  // policies
  kNoPath,
  kUnknownPolicy,
  // learner
  kShapeMismatch,
  kDivergedLoss,
  kCheckpointFormat,
  // cli
  kConfigParse,
  kPresetUnknown,
  kUnknownParameter,
  kLogMapMismatch,
  kIo,
  // environment handles
  kHandleClosed,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kUnreachableCenter: return "UnreachableCenter";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kInvalidCenter: return "InvalidCenter";
    case ErrorCode::kNotATree: return "NotATree";
    case ErrorCode::kNegativeCost: return "NegativeCost";
    case ErrorCode::kStyleTopologyMismatch: return "StyleTopologyMismatch";
    case ErrorCode::kSpacingTooSmall: return "SpacingTooSmall";
    case ErrorCode::kMapParse: return "MapParse";
    case ErrorCode::kBadAssignment: return "BadAssignment";
    case ErrorCode::kMapTopologyMismatch: return "MapTopologyMismatch";
    case ErrorCode::kEpisodeOver: return "EpisodeOver";
    case ErrorCode::kBadAction: return "BadAction";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kTruncatedLog: return "TruncatedLog";
    case ErrorCode::kNegativeEntry: return "NegativeEntry";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kTooFewRuns: return "TooFewRuns";
    case ErrorCode::kLogParse: return "LogParse";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kUnknownPolicy: return "UnknownPolicy";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDivergedLoss: return "DivergedLoss";
    case ErrorCode::kCheckpointFormat: return "CheckpointFormat";
    case ErrorCode::kConfigParse: return "ConfigParse";
    case ErrorCode::kPresetUnknown: return "PresetUnknown";
    case ErrorCode::kUnknownParameter: return "UnknownParameter";
    case ErrorCode::kLogMapMismatch: return "LogMapMismatch";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kHandleClosed: return "HandleClosed";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above, so
/// callers (and tests) can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace supplychain
