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

#include "behavesim/prompt_engine.h"

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

#include "test_support.h"

namespace behavesim {
namespace {

using testing::code_of;

const BehaviorRegistry& reg() { return BehaviorRegistry::default_registry(); }

struct Fixture {
  UserTimeline timeline = testing::reddit_user("prompted", 74);

  ElementQuestion question(std::size_t index, ElementKind kind = ElementKind::kType) const {
    for (const auto& d : decompose(timeline, index, reg())) {
      if (d.kind != kind) continue;
      std::vector<std::string> ds;
      if (kind != ElementKind::kType) ds = {"other one", "other two", "other three"};
      auto q = assemble_question(d, ds, reg(), index);
      q.question_id = make_question_id(d);
      return q;
    }
    throw std::logic_error("no draft of that kind");
  }
};

TEST(HistoryIndices, WindowOfThirtyAtSixty) {
  Fixture f;
  std::vector<std::size_t> expected(30);
  std::iota(expected.begin(), expected.end(), 30);
  EXPECT_EQ(history_indices(f.timeline, 60, 30), expected);
  EXPECT_EQ(history_indices(f.timeline, 60, kAllHistory).size(), 60u);
  EXPECT_TRUE(history_indices(f.timeline, 60, 0).empty());
  EXPECT_EQ(history_indices(f.timeline, 5, 30).size(), 5u);
}

TEST(HistoryIndices, ExcludesBehaviorsAtOrAfterTheGold) {
  Fixture f;
  auto same = f.timeline;
  same.behaviors[10].timestamp = same.behaviors[11].timestamp;  // tie with the gold
  auto idx = history_indices(same, 11, kAllHistory);
  for (auto i : idx) EXPECT_LT(same.behaviors[i].timestamp, same.behaviors[11].timestamp);
}

TEST(AssemblePrompt, HistorySectionHasWindowLines) {
  Fixture f;
  PromptConfig config;
  auto b = assemble_prompt(f.question(60), f.timeline, config);
  EXPECT_EQ(count_history_lines(b.section(PromptSection::kBehaviorHistory)), 30u);
  EXPECT_EQ(count_history_lines(b.text()), 30u);
  EXPECT_NE(b.section(PromptSection::kRoleProfile).find("prompted"), std::string::npos);
  EXPECT_NE(b.section(PromptSection::kRoleProfile).find("testing"), std::string::npos);
}

TEST(AssemblePrompt, NoHistoryAndZeroWindowAreIdentical) {
  Fixture f;
  PromptConfig off;
  off.include_history = false;
  PromptConfig zero;
  zero.history_window = 0;
  auto q = f.question(60);
  auto a = assemble_prompt(q, f.timeline, off);
  auto b = assemble_prompt(q, f.timeline, zero);
  EXPECT_TRUE(a.section(PromptSection::kBehaviorHistory).empty());
  EXPECT_EQ(a.text(), b.text());
  EXPECT_EQ(count_history_lines(a.text()), 0u);
}

TEST(AssemblePrompt, UserinfoAndInterestToggles) {
  Fixture f;
  PromptConfig config;
  config.include_interests = false;
  auto b = assemble_prompt(f.question(20), f.timeline, config);
  EXPECT_EQ(b.section(PromptSection::kRoleProfile).find("testing"), std::string::npos);
  config.include_userinfo = false;
  b = assemble_prompt(f.question(20), f.timeline, config);
  EXPECT_EQ(b.section(PromptSection::kRoleProfile).find("prompted"), std::string::npos);
}

TEST(AssemblePrompt, OffsetsPartitionTheText) {
  Fixture f;
  auto b = assemble_prompt(f.question(40, ElementKind::kContent), f.timeline, PromptConfig{});
  auto off = b.offsets();
  EXPECT_EQ(off[0], 0u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(off[i + 1] - off[i], b.sections[i].size());
  EXPECT_EQ(off[5], b.text().size());
  EXPECT_EQ(b.system_text() + b.user_text(), b.text());
  for (const auto& o : f.question(40, ElementKind::kContent).options) {
    EXPECT_NE(b.question_render.find(std::string(1, o.letter) + ". " + o.text),
              std::string::npos);
  }
}

TEST(AssemblePrompt, MismatchedTimelineRejected) {
  Fixture f;
  auto q = f.question(20);
  auto other = testing::reddit_user("someone", 30);
  EXPECT_EQ(code_of([&] { assemble_prompt(q, other, PromptConfig{}); }),
            ErrorCode::kInconsistentQuestion);
}

TEST(MethodInstructions, OmCotMentionsBothTags) {
  Fixture f;
  PromptConfig config;
  config.method = PromptMethod::kOmCot;
  auto text = render_method_instructions(config, f.question(20));
  EXPECT_NE(text.find("<ANA>"), std::string::npos);
  EXPECT_NE(text.find("<MEM>"), std::string::npos);
  EXPECT_NE(text.find("Therefore"), std::string::npos);
}

TEST(MethodInstructions, ZeroShotHasNoExemplar) {
  Fixture f;
  auto q = f.question(20);
  auto zero = render_method_instructions(PromptConfig{}, q);
  EXPECT_EQ(zero.find(default_few_shot_example(Language::kEnglish)), std::string::npos);
  EXPECT_EQ(zero.find("<ANA>"), std::string::npos);
}

TEST(MethodInstructions, FewShotNeedsExamples) {
  Fixture f;
  PromptConfig config;
  config.method = PromptMethod::kFewShot;
  EXPECT_EQ(code_of([&] { render_method_instructions(config, f.question(20)); }),
            ErrorCode::kMissingFewShotExamples);
  config.few_shot_examples = {"EXAMPLE-ONE", "EXAMPLE-TWO"};
  auto text = render_method_instructions(config, f.question(20));
  EXPECT_NE(text.find("EXAMPLE-ONE"), std::string::npos);
  EXPECT_NE(text.find("EXAMPLE-TWO"), std::string::npos);
  config.few_shot_examples.clear();
  config.bundled_few_shot = true;
  text = render_method_instructions(config, f.question(20));
  EXPECT_NE(text.find(default_few_shot_example(Language::kEnglish)), std::string::npos);
}

TEST(MethodInstructions, OracleEmbedsGoldOnlyInOracleMode) {
  Fixture f;
  auto q = f.question(40, ElementKind::kContent);
  PromptConfig config;
  config.method = PromptMethod::kOmCotOracle;
  auto text = render_method_instructions(config, q);
  EXPECT_NE(text.find(kOracleMarker), std::string::npos);
  EXPECT_NE(text.find(q.gold().text), std::string::npos);
  config.method = PromptMethod::kOmCot;
  text = render_method_instructions(config, q);
  EXPECT_EQ(text.find(kOracleMarker), std::string::npos);
  EXPECT_EQ(text.find(q.gold().text), std::string::npos);
}

TEST(MethodInstructions, TagRestrictionNeedsOmCot) {
  PromptConfig config;
  config.tags = TagRestriction::kOnlyMem;
  EXPECT_EQ(code_of([&] { config.validate(); }), ErrorCode::kIncompatibleMethod);
  config.method = PromptMethod::kOmCot;
  EXPECT_EQ(code_of([&] { config.validate(); }), ErrorCode::kOk);
}

TEST(MethodInstructions, ChineseTemplatesForZhihu) {
  auto t = make_timeline(
      {"zh", "", {}, Platform::kZhihu},
      {testing::record(testing::at("2024-01-01 00:00:00"), "opinion", std::nullopt, "第一"),
       testing::record(testing::at("2024-01-02 00:00:00"), "opinion", std::nullopt, "第二")});
  auto d = decompose(t, 1, reg());
  auto q = assemble_question(d[0], {}, reg(), 1);
  auto b = assemble_prompt(q, t, PromptConfig{});
  EXPECT_NE(b.text(), assemble_prompt(Fixture{}.question(20), Fixture{}.timeline,
                                      PromptConfig{}).text());
  EXPECT_EQ(language_for(Platform::kZhihu), Language::kChinese);
  EXPECT_EQ(q.options.size(), 11u);
}

TEST(DecisionSentence, Formats) {
  EXPECT_EQ(decision_sentence(ElementKind::kType, 'A', "Comment"),
            "Therefore, the behavior type is A.Comment");
  EXPECT_EQ(decision_sentence(ElementKind::kContent, 'C', "x"), "Therefore, the answer is (C).");
}

TEST(RenderHistoryLine, CapsLongFields) {
  std::string longer(1000, 'x');
  auto line = render_history_line(
      testing::record(testing::at("2024-01-01 00:00:00"), "comment", "t", longer));
  EXPECT_LT(line.size(), 400u);
  EXPECT_EQ(count_history_lines(line), 1u);
  EXPECT_EQ(count_history_lines("no history here\n- not a line"), 0u);
}

TEST(TemplateSet, OverridesReplaceBundledFiles) {
  testing::TempDir dir("templates");
  {
    std::ofstream out(dir.file("method_zero_shot.en.txt"));
    out << ";; comment line\nCUSTOM ZERO SHOT {{decision_format}}";
  }
  auto set = TemplateSet::with_overrides(dir.path().string());
  EXPECT_EQ(set.get("method_zero_shot", Language::kEnglish).rfind("CUSTOM ZERO SHOT", 0), 0u);
  EXPECT_EQ(set.get("method_zero_shot", Language::kChinese),
            TemplateSet::defaults().get("method_zero_shot", Language::kChinese));
}

}  // namespace
}  // namespace behavesim
