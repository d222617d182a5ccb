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

// Core domain types: platforms, the per-platform behavior-type registry,
// validated behavior records and user timelines. Everything here is an
// immutable value once constructed.

#ifndef BEHAVESIM_BEHAVIOR_MODEL_H_
#define BEHAVESIM_BEHAVIOR_MODEL_H_

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace behavesim {

enum class Platform { kReddit, kTwitter, kZhihu };

inline constexpr std::array<Platform, 3> kAllPlatforms = {
    Platform::kReddit, Platform::kTwitter, Platform::kZhihu};

// "Reddit", "Twitter", "Zhihu".
std::string_view platform_name(Platform platform);
// Case-insensitive. Throws UnknownPlatform.
Platform parse_platform(std::string_view name);

using UtcSeconds = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS" with an optional
// trailing "Z" or "+00:00", and a bare "YYYY-MM-DD". Zoneless input is UTC.
// Throws BadTimestamp.
UtcSeconds parse_timestamp(std::string_view text);
// "YYYY-MM-DD HH:MM:SS".
std::string format_timestamp(UtcSeconds ts);

struct BehaviorTypeSpec {
  Platform platform = Platform::kReddit;
  std::string type_name;
  bool needs_target = false;
  bool needs_content = false;
  std::string description;

  friend bool operator==(const BehaviorTypeSpec&,
                         const BehaviorTypeSpec&) = default;
};

// Table of valid behavior types. Loaded from a tab-separated data file with
// the columns platform, type_name, needs_target, needs_content, description.
class BehaviorRegistry {
 public:
  BehaviorRegistry() = default;
  explicit BehaviorRegistry(std::vector<BehaviorTypeSpec> rows);

  // The bundled registry asset.
  static const BehaviorRegistry& default_registry();
  static BehaviorRegistry parse(std::string_view tsv);
  static BehaviorRegistry load_file(const std::string& path);

  std::string serialize() const;

  // Type names compare case-insensitively. Throws UnknownBehaviorType.
  const BehaviorTypeSpec& lookup(Platform platform,
                                 std::string_view type_name) const;
  const BehaviorTypeSpec* find(Platform platform,
                               std::string_view type_name) const;

  // Rows for one platform in file order.
  std::vector<const BehaviorTypeSpec*> types_for(Platform platform) const;

  const std::vector<BehaviorTypeSpec>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  friend bool operator==(const BehaviorRegistry&,
                         const BehaviorRegistry&) = default;

 private:
  std::vector<BehaviorTypeSpec> rows_;
};

// Unvalidated fields as they appear in an archive line.
struct RawBehavior {
  std::string timestamp;
  std::string type_name;
  std::optional<std::string> target;
  std::optional<std::string> content;
  std::optional<std::string> community;
};

struct BehaviorRecord {
  UtcSeconds timestamp{};
  std::string type_name;  // canonical registry spelling
  std::optional<std::string> target;
  std::optional<std::string> content;
  std::optional<std::string> community;

  friend bool operator==(const BehaviorRecord&,
                         const BehaviorRecord&) = default;
};

// Checks a raw record against the registry. Empty strings count as absent.
// Throws UnknownBehaviorType, FlagMismatch or BadTimestamp.
BehaviorRecord validate_behavior(const RawBehavior& raw, Platform platform,
                                 const BehaviorRegistry& registry,
                                 UtcSeconds now);

struct UserProfile {
  std::string username;
  std::string description;
  std::vector<std::string> interests;
  Platform platform = Platform::kReddit;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct UserTimeline {
  UserProfile profile;
  // Ascending by timestamp; equal timestamps keep their original order.
  std::vector<BehaviorRecord> behaviors;

  friend bool operator==(const UserTimeline&, const UserTimeline&) = default;
};

// Stable-sorts `behaviors` by timestamp.
UserTimeline make_timeline(UserProfile profile,
                           std::vector<BehaviorRecord> behaviors);

}  // namespace behavesim

#endif  // BEHAVESIM_BEHAVIOR_MODEL_H_
