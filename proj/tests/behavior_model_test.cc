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

#include <gtest/gtest.h>

#include "test_support.h"

namespace behavesim {
namespace {

using testing::at;
using testing::code_of;

const BehaviorRegistry& reg() { return BehaviorRegistry::default_registry(); }

TEST(Registry, TwitterLikeNeedsTargetOnly) {
  const auto& spec = reg().lookup(Platform::kTwitter, "like");
  EXPECT_TRUE(spec.needs_target);
  EXPECT_FALSE(spec.needs_content);
}

TEST(Registry, RedditPostNeedsContentOnly) {
  const auto& spec = reg().lookup(Platform::kReddit, "post");
  EXPECT_FALSE(spec.needs_target);
  EXPECT_TRUE(spec.needs_content);
}

TEST(Registry, RedditRetweetIsUnknown) {
  EXPECT_EQ(code_of([] { reg().lookup(Platform::kReddit, "retweet"); }),
            ErrorCode::kUnknownBehaviorType);
}

TEST(Registry, LookupIgnoresCase) {
  EXPECT_EQ(reg().lookup(Platform::kTwitter, "Like").type_name, "like");
  EXPECT_EQ(reg().lookup(Platform::kZhihu, "New Question").type_name, "new question");
}

TEST(Registry, PlatformTypeCounts) {
  EXPECT_EQ(reg().types_for(Platform::kReddit).size(), 2u);
  EXPECT_EQ(reg().types_for(Platform::kTwitter).size(), 5u);
  EXPECT_EQ(reg().types_for(Platform::kZhihu).size(), 11u);
}

TEST(Registry, SerializeRoundTrips) {
  EXPECT_EQ(BehaviorRegistry::parse(reg().serialize()), reg());
}

TEST(Registry, DuplicatePairRejected) {
  std::string tsv =
      "Reddit\tpost\tfalse\ttrue\ta\n"
      "Reddit\tPOST\tfalse\ttrue\tb\n";
  EXPECT_NE(code_of([&] { BehaviorRegistry::parse(tsv); }), ErrorCode::kOk);
}

TEST(Platform, NamesRoundTrip) {
  for (auto p : kAllPlatforms) EXPECT_EQ(parse_platform(platform_name(p)), p);
  EXPECT_EQ(code_of([] { parse_platform("Myspace"); }), ErrorCode::kUnknownPlatform);
}

TEST(Timestamp, ParseAndFormat) {
  auto ts = at("2020-08-14 09:59:57");
  EXPECT_EQ(format_timestamp(ts), "2020-08-14 09:59:57");
  EXPECT_EQ(code_of([] { parse_timestamp("2020-13-40 00:00:00"); }),
            ErrorCode::kBadTimestamp);
  EXPECT_EQ(code_of([] { parse_timestamp("yesterday"); }), ErrorCode::kBadTimestamp);
}

RawBehavior raw(const char* type, std::optional<std::string> target,
                std::optional<std::string> content) {
  return {"2024-01-01 00:00:00", type, std::move(target), std::move(content), std::nullopt};
}

TEST(ValidateBehavior, TwitterLikeWithTargetIsValid) {
  auto b = validate_behavior(raw("like", "a tweet", std::nullopt), Platform::kTwitter,
                             reg(), testing::far_future());
  EXPECT_EQ(b.type_name, "like");
  EXPECT_EQ(*b.target, "a tweet");
}

TEST(ValidateBehavior, TwitterLikeWithContentIsFlagMismatch) {
  EXPECT_EQ(code_of([] {
              validate_behavior(raw("like", "a tweet", "my words"), Platform::kTwitter,
                                reg(), testing::far_future());
            }),
            ErrorCode::kFlagMismatch);
}

TEST(ValidateBehavior, ZhihuAnswerWithoutContentIsFlagMismatch) {
  EXPECT_EQ(code_of([] {
              validate_behavior(raw("answer", "a question", std::nullopt),
                                Platform::kZhihu, reg(), testing::far_future());
            }),
            ErrorCode::kFlagMismatch);
}

TEST(ValidateBehavior, FutureTimestampRejected) {
  EXPECT_EQ(code_of([] {
              validate_behavior(raw("post", std::nullopt, "x"), Platform::kReddit, reg(),
                                at("2023-01-01 00:00:00"));
            }),
            ErrorCode::kBadTimestamp);
}

TEST(Timeline, SortIsStableOnEqualTimestamps) {
  auto t0 = at("2024-01-02 00:00:00");
  std::vector<BehaviorRecord> bs = {
      testing::record(t0, "post", std::nullopt, "second"),
      testing::record(at("2024-01-01 00:00:00"), "post", std::nullopt, "first"),
      testing::record(t0, "post", std::nullopt, "third"),
  };
  auto t = make_timeline({"u", "", {}, Platform::kReddit}, bs);
  ASSERT_EQ(t.behaviors.size(), 3u);
  EXPECT_EQ(*t.behaviors[0].content, "first");
  EXPECT_EQ(*t.behaviors[1].content, "second");
  EXPECT_EQ(*t.behaviors[2].content, "third");
}

}  // namespace
}  // namespace behavesim
