// Copyright 2026 The behavesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "behavesim/error.h"

namespace behavesim {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownPlatform: return "UnknownPlatform";
    case ErrorCode::kUnknownBehaviorType: return "UnknownBehaviorType";
    case ErrorCode::kFlagMismatch: return "FlagMismatch";
    case ErrorCode::kBadTimestamp: return "BadTimestamp";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyTimeline: return "EmptyTimeline";
    case ErrorCode::kNoHistory: return "NoHistory";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kDuplicateOptionText: return "DuplicateOptionText";
    case ErrorCode::kInconsistentQuestion: return "InconsistentQuestion";
    case ErrorCode::kMissingFewShotExamples: return "MissingFewShotExamples";
    case ErrorCode::kBackendExhausted: return "BackendExhausted";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kOversizeInput: return "OversizeInput";
    case ErrorCode::kBackendRejected: return "BackendRejected";
    case ErrorCode::kUnparseable: return "Unparseable";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kMalformedTags: return "MalformedTags";
    case ErrorCode::kMissingSegments: return "MissingSegments";
    case ErrorCode::kMissingDecision: return "MissingDecision";
    case ErrorCode::kLeakageUnfixable: return "LeakageUnfixable";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
    case ErrorCode::kIncompatibleMethod: return "IncompatibleMethod";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace behavesim
