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

// Timeline archive reading/writing and user selection.
//
// Archive format: UTF-8, one JSON object per line. Line 1 is the profile
//   {"username": ..., "description": ..., "interests": [...], "platform": ...}
// and every following line is a behavior
//   {"timestamp": ..., "type": ..., "target"?: ..., "content"?: ...,
//    "community"?: ...}.

#ifndef BEHAVESIM_INGESTION_H_
#define BEHAVESIM_INGESTION_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "behavesim/behavior_model.h"

namespace behavesim {

UserTimeline parse_timeline(std::string_view text,
                            const BehaviorRegistry& registry, UtcSeconds now);

// Inverse of parse_timeline for valid timelines.
std::string serialize_timeline(const UserTimeline& timeline);

// Loads one archive file, or every *.jsonl file in a directory (sorted by
// file name). Files are parsed in parallel; the result order is the file
// order. Errors name the offending file.
std::vector<UserTimeline> load_timelines(const std::string& path,
                                         const BehaviorRegistry& registry,
                                         UtcSeconds now);

// Writes one <platform>_<username>.jsonl file per timeline into `dir`.
void write_timelines(const std::vector<UserTimeline>& timelines,
                     const std::string& dir);

struct SelectionPolicy {
  std::size_t min_behaviors = 70;
  std::size_t max_behaviors = 1000;
  std::size_t min_distinct_types = 2;
  std::set<Platform> allowed_platforms = {kAllPlatforms.begin(),
                                          kAllPlatforms.end()};

  // Throws InvalidArgument when the bounds are inconsistent.
  void validate() const;
};

enum class RejectReason {
  kTooFew,
  kTooMany,
  kTooFewTypes,
  kPlatformNotAllowed,
  kDuplicateUsername,
};

std::string_view reject_reason_name(RejectReason reason);

struct Rejection {
  std::string username;
  RejectReason reason;
};

struct Selection {
  std::vector<UserTimeline> kept;
  std::vector<Rejection> rejected;
};

// Partitions users; input order is preserved in both outputs. Every copy of
// a username that occurs more than once is rejected as a duplicate.
Selection select_users(std::vector<UserTimeline> timelines,
                       const SelectionPolicy& policy);

}  // namespace behavesim

#endif  // BEHAVESIM_INGESTION_H_
