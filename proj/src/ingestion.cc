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

#include "behavesim/ingestion.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "behavesim/error.h"
#include "behavesim/text_util.h"
#include "json.hpp"

namespace behavesim {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  fail(ErrorCode::kMalformedLine,
       "line " + std::to_string(line_no) + ": " + what);
}

std::string required_string(const Json& obj, const char* key,
                            std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    malformed(line_no, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, const char* key,
                                           std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    malformed(line_no, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

UserProfile parse_profile(const Json& obj, std::size_t line_no) {
  UserProfile profile;
  profile.username = required_string(obj, "username", line_no);
  if (trim(profile.username).empty()) malformed(line_no, "empty username");
  profile.description =
      optional_string(obj, "description", line_no).value_or("");
  if (auto it = obj.find("interests"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) malformed(line_no, "'interests' must be an array");
    for (const auto& v : *it) {
      if (!v.is_string()) malformed(line_no, "interests must be strings");
      profile.interests.push_back(v.get<std::string>());
    }
  }
  try {
    profile.platform =
        parse_platform(required_string(obj, "platform", line_no));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnknownPlatform) throw;
    fail(ErrorCode::kUnknownPlatform,
         "line " + std::to_string(line_no) + ": " + e.what());
  }
  return profile;
}

std::string sanitize_file_stem(std::string_view username) {
  std::string out;
  for (char c : username) {
    auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) || c == '-' || c == '_' ? c : '_');
    if (out.size() >= 40) break;
  }
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(username)));
  return out + "_" + std::string(hash, 8);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

UserTimeline parse_timeline(std::string_view text,
                            const BehaviorRegistry& registry, UtcSeconds now) {
  std::optional<UserProfile> profile;
  std::vector<BehaviorRecord> behaviors;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::parse_error&) {
      malformed(line_no, "invalid JSON");
    }
    if (!obj.is_object()) malformed(line_no, "expected a JSON object");
    if (!profile) {
      profile = parse_profile(obj, line_no);
      continue;
    }
    RawBehavior raw;
    raw.timestamp = required_string(obj, "timestamp", line_no);
    raw.type_name = required_string(obj, "type", line_no);
    raw.target = optional_string(obj, "target", line_no);
    raw.content = optional_string(obj, "content", line_no);
    raw.community = optional_string(obj, "community", line_no);
    try {
      behaviors.push_back(
          validate_behavior(raw, profile->platform, registry, now));
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!profile) fail(ErrorCode::kEmptyTimeline, "no profile line");
  if (behaviors.empty()) {
    fail(ErrorCode::kEmptyTimeline,
         "user '" + profile->username + "' has no behaviors");
  }
  return make_timeline(std::move(*profile), std::move(behaviors));
}

std::string serialize_timeline(const UserTimeline& timeline) {
  const auto& p = timeline.profile;
  Json head;
  head["username"] = p.username;
  head["description"] = p.description;
  head["interests"] = p.interests;
  head["platform"] = std::string(platform_name(p.platform));
  std::string out = head.dump() + "\n";
  for (const auto& b : timeline.behaviors) {
    Json line;
    line["timestamp"] = format_timestamp(b.timestamp);
    line["type"] = b.type_name;
    if (b.target) line["target"] = *b.target;
    if (b.content) line["content"] = *b.content;
    if (b.community) line["community"] = *b.community;
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<UserTimeline> load_timelines(const std::string& path,
                                         const BehaviorRegistry& registry,
                                         UtcSeconds now) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path, ec)) {
    files.emplace_back(path);
  } else {
    fail(ErrorCode::kIoError, "no timeline file or directory at " + path);
  }

  std::vector<std::optional<UserTimeline>> parsed(files.size());
  std::vector<std::exception_ptr> errors(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        parsed[i] = parse_timeline(read_file(files[i]), registry, now);
      } catch (const Error& e) {
        errors[i] = std::make_exception_ptr(
            Error(e.code(), files[i].filename().string() + ": " + e.what()));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n_threads = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, std::max<std::size_t>(files.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  std::vector<UserTimeline> out;
  out.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*parsed[i]));
  }
  return out;
}

void write_timelines(const std::vector<UserTimeline>& timelines,
                     const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir);
  for (const auto& t : timelines) {
    auto name = ascii_lower(platform_name(t.profile.platform)) + "_" +
                sanitize_file_stem(t.profile.username) + ".jsonl";
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + name);
    out << serialize_timeline(t);
  }
}

void SelectionPolicy::validate() const {
  if (min_behaviors >= max_behaviors) {
    fail(ErrorCode::kInvalidArgument,
         "min_behaviors must be below max_behaviors");
  }
  if (min_distinct_types < 1) {
    fail(ErrorCode::kInvalidArgument, "min_distinct_types must be >= 1");
  }
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kTooFew:
      return "TooFew";
    case RejectReason::kTooMany:
      return "TooMany";
    case RejectReason::kTooFewTypes:
      return "TooFewTypes";
    case RejectReason::kPlatformNotAllowed:
      return "PlatformNotAllowed";
    case RejectReason::kDuplicateUsername:
      return "DuplicateUsername";
  }
  return "Unknown";
}

Selection select_users(std::vector<UserTimeline> timelines,
                       const SelectionPolicy& policy) {
  policy.validate();
  Selection out;
  std::unordered_map<std::string, std::size_t> name_counts;
  for (const auto& t : timelines) ++name_counts[t.profile.username];
  for (auto& t : timelines) {
    const auto& name = t.profile.username;
    auto reject = [&](RejectReason reason) {
      out.rejected.push_back({name, reason});
    };
    if (name_counts[name] > 1) {
      reject(RejectReason::kDuplicateUsername);
      continue;
    }
    if (!policy.allowed_platforms.contains(t.profile.platform)) {
      reject(RejectReason::kPlatformNotAllowed);
      continue;
    }
    auto n = t.behaviors.size();
    if (n < policy.min_behaviors) {
      reject(RejectReason::kTooFew);
      continue;
    }
    if (n > policy.max_behaviors) {
      reject(RejectReason::kTooMany);
      continue;
    }
    std::set<std::string> types;
    for (const auto& b : t.behaviors) types.insert(b.type_name);
    if (types.size() < policy.min_distinct_types) {
      reject(RejectReason::kTooFewTypes);
      continue;
    }
    out.kept.push_back(std::move(t));
  }
  return out;
}

}  // namespace behavesim
