// Copyright 2026 The classim Authors.
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

#include "classim/error.hpp"

namespace classim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kFileNotFound: return "file_not_found";
    case ErrorCode::kUnsupportedEncoding: return "unsupported_encoding";
    case ErrorCode::kMalformedFile: return "malformed_file";
    case ErrorCode::kEmptyAudio: return "empty_audio";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kClipping: return "clipping";
    case ErrorCode::kSampleRateMismatch: return "sample_rate_mismatch";
    case ErrorCode::kNoPeak: return "no_peak";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kSilentInput: return "silent_input";
    case ErrorCode::kContradictorySplit: return "contradictory_split";
    case ErrorCode::kMissingDependency: return "missing_dependency";
    case ErrorCode::kInvalidConfig: return "invalid_config";
  }
  return "unknown";
}

}  // namespace classim
