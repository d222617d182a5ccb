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

#include "behavesim/behavior_model.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "behavesim/error.h"
#include "behavesim/text_util.h"
#include "behavesim_assets.h"

namespace behavesim {
namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30,
                                       31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

bool read_digits(std::string_view s, std::size_t pos, std::size_t n,
                 unsigned& out) {
  if (pos + n > s.size()) return false;
  auto first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + n, out);
  return ec == std::errc() && ptr == first + n;
}

bool parse_bool_cell(std::string_view cell, bool& out) {
  auto v = ascii_lower(trim(cell));
  if (v == "true" || v == "1" || v == "yes") {
    out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "no") {
    out = false;
    return true;
  }
  return false;
}

std::optional<std::string> present(const std::optional<std::string>& v) {
  if (!v || trim(*v).empty()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view platform_name(Platform platform) {
  switch (platform) {
    case Platform::kReddit:
      return "Reddit";
    case Platform::kTwitter:
      return "Twitter";
    case Platform::kZhihu:
      return "Zhihu";
  }
  return "Unknown";
}

Platform parse_platform(std::string_view name) {
  for (Platform p : kAllPlatforms) {
    if (iequals(trim(name), platform_name(p))) return p;
  }
  fail(ErrorCode::kUnknownPlatform,
       "unknown platform '" + std::string(name) + "'");
}

UtcSeconds parse_timestamp(std::string_view text) {
  auto bad = [&]() -> UtcSeconds {
    fail(ErrorCode::kBadTimestamp,
         "cannot parse timestamp '" + std::string(text) + "'");
  };
  std::string_view s = trim(text);
  unsigned year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (s.size() < 10 || !read_digits(s, 0, 4, year) || s[4] != '-' ||
      !read_digits(s, 5, 2, month) || s[7] != '-' ||
      !read_digits(s, 8, 2, day)) {
    return bad();
  }
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != ' ' && s[pos] != 'T') return bad();
    if (!read_digits(s, pos + 1, 2, hour) || s.size() < pos + 9 ||
        s[pos + 3] != ':' || !read_digits(s, pos + 4, 2, minute) ||
        s[pos + 6] != ':' || !read_digits(s, pos + 7, 2, second)) {
      return bad();
    }
    pos += 9;
    auto rest = s.substr(pos);
    if (!rest.empty() && rest != "Z" && rest != "+00:00" && rest != "+0000") {
      return bad();
    }
  }
  if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) ||
      hour > 23 || minute > 59 || second > 59) {
    return bad();
  }
  auto days = days_from_civil(year, month, day);
  return UtcSeconds(std::chrono::seconds(days * 86400 + hour * 3600 +
                                         minute * 60 + second));
}

std::string format_timestamp(UtcSeconds ts) {
  std::int64_t secs = ts.time_since_epoch().count();
  std::int64_t days = secs >= 0 ? secs / 86400 : (secs - 86399) / 86400;
  std::int64_t rem = secs - days * 86400;
  auto date = civil_from_days(days);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                static_cast<long long>(date.year), date.month, date.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

BehaviorRegistry::BehaviorRegistry(std::vector<BehaviorTypeSpec> rows)
    : rows_(std::move(rows)) {
  std::set<std::pair<Platform, std::string>> seen;
  for (const auto& row : rows_) {
    if (trim(row.type_name).empty()) {
      fail(ErrorCode::kInvalidArgument, "registry row with empty type name");
    }
    if (!seen.emplace(row.platform, ascii_lower(row.type_name)).second) {
      fail(ErrorCode::kInvalidArgument,
           "duplicate registry row (" + std::string(platform_name(row.platform)) +
               ", " + row.type_name + ")");
    }
  }
}

const BehaviorRegistry& BehaviorRegistry::default_registry() {
  static const BehaviorRegistry registry = parse(assets::kRegistryTsv);
  return registry;
}

BehaviorRegistry BehaviorRegistry::parse(std::string_view tsv) {
  std::vector<BehaviorTypeSpec> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (auto line : split(tsv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cells = split(line, '\t');
    if (!header_seen) {
      header_seen = true;
      if (cells.size() >= 2 && iequals(trim(cells[0]), "platform") &&
          iequals(trim(cells[1]), "type_name")) {
        continue;
      }
    }
    if (cells.size() != 5) {
      fail(ErrorCode::kMalformedLine,
           "registry line " + std::to_string(line_no) + ": expected 5 columns");
    }
    BehaviorTypeSpec spec;
    spec.platform = parse_platform(cells[0]);
    spec.type_name = std::string(trim(cells[1]));
    if (!parse_bool_cell(cells[2], spec.needs_target) ||
        !parse_bool_cell(cells[3], spec.needs_content)) {
      fail(ErrorCode::kMalformedLine,
           "registry line " + std::to_string(line_no) + ": bad flag value");
    }
    spec.description = std::string(trim(cells[4]));
    rows.push_back(std::move(spec));
  }
  return BehaviorRegistry(std::move(rows));
}

BehaviorRegistry BehaviorRegistry::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open registry file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string BehaviorRegistry::serialize() const {
  std::string out =
      "platform\ttype_name\tneeds_target\tneeds_content\tdescription\n";
  for (const auto& row : rows_) {
    out += platform_name(row.platform);
    out += '\t';
    out += row.type_name;
    out += row.needs_target ? "\ttrue" : "\tfalse";
    out += row.needs_content ? "\ttrue\t" : "\tfalse\t";
    out += row.description;
    out += '\n';
  }
  return out;
}

const BehaviorTypeSpec* BehaviorRegistry::find(
    Platform platform, std::string_view type_name) const {
  auto name = trim(type_name);
  for (const auto& row : rows_) {
    if (row.platform == platform && iequals(row.type_name, name)) return &row;
  }
  return nullptr;
}

const BehaviorTypeSpec& BehaviorRegistry::lookup(
    Platform platform, std::string_view type_name) const {
  if (const auto* spec = find(platform, type_name)) return *spec;
  fail(ErrorCode::kUnknownBehaviorType,
       "no behavior type '" + std::string(type_name) + "' on " +
           std::string(platform_name(platform)));
}

std::vector<const BehaviorTypeSpec*> BehaviorRegistry::types_for(
    Platform platform) const {
  std::vector<const BehaviorTypeSpec*> out;
  for (const auto& row : rows_) {
    if (row.platform == platform) out.push_back(&row);
  }
  return out;
}

BehaviorRecord validate_behavior(const RawBehavior& raw, Platform platform,
                                 const BehaviorRegistry& registry,
                                 UtcSeconds now) {
  const auto& spec = registry.lookup(platform, raw.type_name);
  BehaviorRecord record;
  record.timestamp = parse_timestamp(raw.timestamp);
  if (record.timestamp > now) {
    fail(ErrorCode::kBadTimestamp,
         "timestamp " + std::string(raw.timestamp) + " is in the future");
  }
  record.type_name = spec.type_name;
  record.target = present(raw.target);
  record.content = present(raw.content);
  record.community = present(raw.community);
  if (record.target.has_value() != spec.needs_target) {
    fail(ErrorCode::kFlagMismatch,
         "'" + spec.type_name + "' " +
             (spec.needs_target ? "requires a target" : "must not carry a target"));
  }
  if (record.content.has_value() != spec.needs_content) {
    fail(ErrorCode::kFlagMismatch,
         "'" + spec.type_name + "' " +
             (spec.needs_content ? "requires content" : "must not carry content"));
  }
  return record;
}

UserTimeline make_timeline(UserProfile profile,
                           std::vector<BehaviorRecord> behaviors) {
  std::stable_sort(behaviors.begin(), behaviors.end(),
                   [](const BehaviorRecord& a, const BehaviorRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  return UserTimeline{std::move(profile), std::move(behaviors)};
}

}  // namespace behavesim
