// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qtraj/error.hpp"

namespace qtraj {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNearZeroNorm: return "NearZeroNorm";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kIntervalMismatch: return "IntervalMismatch";
    case ErrorCode::kNonHermitian: return "NonHermitian";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kUndefinedRate: return "UndefinedRate";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

}  // namespace qtraj
