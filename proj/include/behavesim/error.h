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

#ifndef BEHAVESIM_ERROR_H_
#define BEHAVESIM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace behavesim {

// Domain error kinds. The numeric values are part of the C ABI (they are
// returned verbatim as bsim_status codes), so only append.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIoError = 2,
  kUnknownPlatform = 3,
  kUnknownBehaviorType = 4,
  kFlagMismatch = 5,
  kBadTimestamp = 6,
  kMalformedLine = 7,
  kEmptyTimeline = 8,
  kNoHistory = 9,
  kPoolTooSmall = 10,
  kDuplicateOptionText = 11,
  kInconsistentQuestion = 12,
  kMissingFewShotExamples = 13,
  kBackendExhausted = 14,
  kAuthError = 15,
  kOversizeInput = 16,
  kBackendRejected = 17,
  kUnparseable = 18,
  kOutOfRange = 19,
  kMalformedTags = 20,
  kMissingSegments = 21,
  kMissingDecision = 22,
  kLeakageUnfixable = 23,
  kLengthMismatch = 24,
  kEmbedderUnavailable = 25,
  kIncompatibleMethod = 26,
  kInternal = 27,
};

// Stable machine-readable name, e.g. "FlagMismatch".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace behavesim

#endif  // BEHAVESIM_ERROR_H_
