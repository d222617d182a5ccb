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

#include "behavesim/qa_builder.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "behavesim/rng.h"
#include "test_support.h"

namespace behavesim {
namespace {

using testing::at;
using testing::code_of;
using testing::record;

const BehaviorRegistry& reg() { return BehaviorRegistry::default_registry(); }

std::set<ElementKind> kinds_of(const std::vector<QuestionDraft>& drafts) {
  std::set<ElementKind> out;
  for (const auto& d : drafts) out.insert(d.kind);
  return out;
}

TEST(Decompose, TwitterLikeGivesObjectAndType) {
  auto t = make_timeline(
      {"tw", "", {}, Platform::kTwitter},
      {record(at("2024-01-01 00:00:00"), "post", std::nullopt, "hello"),
       record(at("2024-01-02 00:00:00"), "like", "someone else", std::nullopt)});
  auto drafts = decompose(t, 1, reg());
  EXPECT_EQ(kinds_of(drafts), (std::set{ElementKind::kObject, ElementKind::kType}));
  EXPECT_EQ(drafts.front().gold_text, "someone else");
}

TEST(Decompose, RedditPostGivesTypeAndContent) {
  auto t = testing::reddit_user("u", 4);  // index 3 is a post
  auto drafts = decompose(t, 3, reg());
  EXPECT_EQ(kinds_of(drafts), (std::set{ElementKind::kType, ElementKind::kContent}));
}

TEST(Decompose, FirstBehaviorHasNoHistory) {
  auto t = testing::reddit_user("u", 4);
  EXPECT_EQ(code_of([&] { decompose(t, 0, reg()); }), ErrorCode::kNoHistory);
}

// One content text per user; `gold` owns the first text.
struct PoolFixture {
  std::vector<UserTimeline> corpus;
  testing::TableEmbedder embedder;
  testing::TableSentiment sentiment;

  void add(const std::string& user, const std::string& content, UtcSeconds ts,
           const std::string& community, float x = 1.0f, float y = 0.0f,
           double sentiment_score = 0.0) {
    corpus.push_back(make_timeline({user, "", {}, Platform::kReddit},
                                   {record(ts, "post", std::nullopt, content, community)}));
    embedder.table[content] = {x, y};
    sentiment.table[content] = sentiment_score;
  }

  QuestionDraft draft() const {
    const auto& g = corpus.front();
    QuestionDraft d;
    d.username = g.profile.username;
    d.platform = Platform::kReddit;
    d.kind = ElementKind::kContent;
    d.behavior_index = 0;
    d.gold_text = *g.behaviors[0].content;
    d.timestamp = g.behaviors[0].timestamp;
    d.community = g.behaviors[0].community;
    return d;
  }
};

TEST(CandidatePool, ExactlyThreeSameCommunityInWindow) {
  PoolFixture f;
  auto t = at("2024-03-10 12:00:00");
  f.add("gold", "gold text", t, "c");
  f.add("a", "text a", t + std::chrono::hours(1), "c");
  f.add("b", "text b", t - std::chrono::hours(30), "c");
  f.add("c", "text c", t + std::chrono::days(6), "c");
  f.add("far", "text far", t + std::chrono::days(30), "c");
  f.add("other", "text other", t, "elsewhere");
  auto pool = build_candidate_pool(f.corpus, f.draft(), {}, f.embedder, f.sentiment);
  std::set<std::string> texts;
  for (const auto& c : pool.candidates) texts.insert(c.text);
  EXPECT_EQ(texts, (std::set<std::string>{"text a", "text b", "text c"}));
  EXPECT_EQ(pool.relaxation, PoolRelaxation::kNone);
}

TEST(CandidatePool, RelaxesCommunityAndMatchesExhaustiveFilter) {
  PoolFixture f;
  auto t = at("2024-03-10 12:00:00");
  f.add("gold", "gold text", t, "lonely");
  for (int i = 0; i < 50; ++i) {
    f.add("in" + std::to_string(i), "in window " + std::to_string(i),
          t + std::chrono::hours(i - 25), "busy", 1.0f, 0.02f * i);
  }
  for (int i = 0; i < 10; ++i) {
    f.add("out" + std::to_string(i), "out of window " + std::to_string(i),
          t + std::chrono::days(20 + i), "busy");
  }
  PoolConfig config;
  auto pool = build_candidate_pool(f.corpus, f.draft(), config, f.embedder, f.sentiment);
  EXPECT_EQ(pool.relaxation, PoolRelaxation::kDroppedCommunity);

  // Oracle: filter every entry by the window rule directly.
  std::set<std::string> expected;
  for (const auto& u : f.corpus) {
    if (u.profile.username == "gold") continue;
    const auto& b = u.behaviors[0];
    auto gap = b.timestamp > t ? b.timestamp - t : t - b.timestamp;
    if (gap <= config.window) expected.insert(*b.content);
  }
  std::set<std::string> got;
  for (const auto& c : pool.candidates) got.insert(c.text);
  EXPECT_EQ(got, expected);
  EXPECT_EQ(got.size(), 50u);
  for (std::size_t i = 1; i < pool.candidates.size(); ++i) {
    EXPECT_GE(pool.candidates[i - 1].similarity, pool.candidates[i].similarity);
  }
}

TEST(CandidatePool, DropsTimeWhenWindowIsEmpty) {
  PoolFixture f;
  auto t = at("2024-03-10 12:00:00");
  f.add("gold", "gold text", t, "c");
  for (int i = 0; i < 4; ++i) {
    f.add("x" + std::to_string(i), "late " + std::to_string(i), t + std::chrono::days(40 + i), "c");
  }
  auto pool = build_candidate_pool(f.corpus, f.draft(), {}, f.embedder, f.sentiment);
  EXPECT_EQ(pool.relaxation, PoolRelaxation::kDroppedTime);
  EXPECT_EQ(pool.candidates.size(), 4u);
}

TEST(CandidatePool, SingletonCorpusIsPoolTooSmall) {
  PoolFixture f;
  f.add("gold", "gold text", at("2024-03-10 12:00:00"), "c");
  EXPECT_EQ(code_of([&] {
              build_candidate_pool(f.corpus, f.draft(), {}, f.embedder, f.sentiment);
            }),
            ErrorCode::kPoolTooSmall);
}

TEST(CandidatePool, ExcludesGoldUsersOwnTexts) {
  PoolFixture f;
  auto t = at("2024-03-10 12:00:00");
  f.add("gold", "gold text", t, "c");
  // Another user posted the gold user's exact text; it must not be a distractor.
  f.add("copy", "gold text", t, "c");
  for (int i = 0; i < 3; ++i) f.add("o" + std::to_string(i), "o" + std::to_string(i), t, "c");
  auto pool = build_candidate_pool(f.corpus, f.draft(), {}, f.embedder, f.sentiment);
  for (const auto& c : pool.candidates) EXPECT_NE(c.text, "gold text");
  EXPECT_EQ(pool.candidates.size(), 3u);
}

CandidatePool pool_of(std::size_t n, double gold_sentiment,
                      const std::vector<double>& sentiments) {
  CandidatePool pool;
  pool.gold_text = "gold";
  pool.gold_sentiment = gold_sentiment;
  for (std::size_t i = 0; i < n; ++i) {
    pool.candidates.push_back({"cand" + std::to_string(i), 1.0 - 0.01 * i, sentiments[i], "u"});
  }
  return pool;
}

TEST(SampleDistractors, ExactlyThreeEligible) {
  auto pool = pool_of(3, 0.0, {0.1, -0.1, 0.2});
  auto s = sample_distractors(pool, {}, 5);
  auto texts = s.texts();
  std::set<std::string> got(texts.begin(), texts.end());
  EXPECT_EQ(got, (std::set<std::string>{"cand0", "cand1", "cand2"}));
  EXPECT_EQ(s.refilled, 0u);
}

TEST(SampleDistractors, SameSeedSameOutput) {
  std::vector<double> sent(30, 0.0);
  auto pool = pool_of(30, 0.0, sent);
  EXPECT_EQ(sample_distractors(pool, {}, 99).texts(), sample_distractors(pool, {}, 99).texts());
}

TEST(SampleDistractors, TwoEligiblePlusNearestRefill) {
  // 40 candidates; only cand3 and cand7 are within tau of the gold (0.0).
  std::vector<double> sent(40);
  for (std::size_t i = 0; i < 40; ++i) sent[i] = 0.9 - 0.001 * i;
  sent[3] = 0.05;
  sent[7] = -0.2;
  sent[12] = 0.45;  // nearest of the rest inside top-20
  sent[25] = 0.31;  // nearer, but outside top-20
  auto pool = pool_of(40, 0.0, sent);
  auto s = sample_distractors(pool, {0.3, 20}, 1);
  EXPECT_EQ(s.eligible, 2u);
  EXPECT_EQ(s.refilled, 1u);

  // Oracle: exhaustive re-ranking of the top-20 by sentiment gap.
  std::vector<std::pair<double, std::string>> rest;
  std::set<std::string> eligible;
  for (std::size_t i = 0; i < 20; ++i) {
    double gap = std::abs(sent[i]);
    if (gap <= 0.3) {
      eligible.insert(pool.candidates[i].text);
    } else {
      rest.emplace_back(gap, pool.candidates[i].text);
    }
  }
  std::sort(rest.begin(), rest.end());
  std::set<std::string> expected = eligible;
  expected.insert(rest.front().second);
  auto texts = s.texts();
  EXPECT_EQ(std::set<std::string>(texts.begin(), texts.end()), expected);
  EXPECT_TRUE(expected.contains("cand12"));
}

TEST(SampleDistractors, UniformOverEligibleSubsets) {
  // Property: every eligible candidate is picked at a similar rate.
  std::vector<double> sent(6, 0.0);
  auto pool = pool_of(6, 0.0, sent);
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    for (const auto& t : sample_distractors(pool, {}, seed).texts()) ++hits[t];
  }
  for (const auto& [text, n] : hits) EXPECT_NEAR(n / 3000.0, 0.5, 0.05) << text;
}

QuestionDraft type_draft(Platform p, const std::string& gold) {
  QuestionDraft d;
  d.username = "u";
  d.platform = p;
  d.kind = ElementKind::kType;
  d.behavior_index = 1;
  d.gold_text = gold;
  return d;
}

TEST(AssembleQuestion, ZhihuTypeHasElevenOptions) {
  auto q = assemble_question(type_draft(Platform::kZhihu, "answer"), {}, reg(), 3);
  ASSERT_EQ(q.options.size(), 11u);
  EXPECT_EQ(q.options.front().letter, 'A');
  EXPECT_EQ(q.options.back().letter, 'K');
  EXPECT_EQ(q.gold().text, "answer");
}

TEST(AssembleQuestion, ObjectShuffleIsSeeded) {
  QuestionDraft d = type_draft(Platform::kTwitter, "gold target");
  d.kind = ElementKind::kObject;
  std::vector<std::string> ds = {"x", "y", "z"};
  auto a = assemble_question(d, ds, reg(), 11);
  EXPECT_EQ(a, assemble_question(d, ds, reg(), 11));
  EXPECT_EQ(a.options.size(), 4u);
  EXPECT_EQ(a.gold().text, "gold target");
  std::set<char> positions;
  for (std::uint64_t s = 0; s < 64; ++s) {
    positions.insert(assemble_question(d, ds, reg(), s).gold_letter);
  }
  EXPECT_EQ(positions.size(), 4u);
}

TEST(AssembleQuestion, DistractorEqualToGoldRejected) {
  QuestionDraft d = type_draft(Platform::kTwitter, "same");
  d.kind = ElementKind::kContent;
  EXPECT_EQ(code_of([&] { assemble_question(d, {"same", "b", "c"}, reg(), 1); }),
            ErrorCode::kDuplicateOptionText);
}

TEST(Question, OptionLookup) {
  auto q = assemble_question(type_draft(Platform::kReddit, "post"), {}, reg(), 1);
  EXPECT_EQ(code_of([&] { q.option('Z'); }), ErrorCode::kOutOfRange);
}

TEST(Question, SerializeRoundTrip) {
  QuestionDraft d = type_draft(Platform::kZhihu, "gold 文本");
  d.kind = ElementKind::kContent;
  auto q = assemble_question(d, {"甲", "乙", "丙"}, reg(), 8);
  EXPECT_EQ(parse_question(serialize_question(q)), q);
  EXPECT_EQ(code_of([] { parse_question("{\"question_id\":1}"); }), ErrorCode::kMalformedLine);
}

std::vector<ElementQuestion> questions_for_users(std::size_t users, std::uint64_t seed) {
  std::vector<ElementQuestion> out;
  SeededRng rng(seed);
  for (std::size_t u = 0; u < users; ++u) {
    auto n = 5 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      auto d = type_draft(Platform::kReddit, i % 2 ? "post" : "comment");
      d.username = "user" + std::to_string(u);
      d.behavior_index = i + 1;
      auto q = assemble_question(d, {}, reg(), i);
      q.question_id = make_question_id(d);
      out.push_back(q);
    }
  }
  return out;
}

TEST(Split, SingleUserGoesToTrainWithWarning) {
  auto qs = questions_for_users(1, 1);
  auto s = split_dataset(qs, 0.78, 3);
  EXPECT_EQ(s.train.size(), qs.size());
  EXPECT_TRUE(s.test.empty());
  EXPECT_TRUE(s.warning.has_value());
}

TEST(Split, PartitionsUsersAcrossSeeds) {
  auto qs = questions_for_users(30, 42);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = split_dataset(qs, 0.78, seed);
    for (const auto& u : s.train_users) EXPECT_FALSE(s.test_users.contains(u));
    EXPECT_EQ(s.train.size() + s.test.size(), qs.size());
    for (const auto& q : s.train) EXPECT_TRUE(s.train_users.contains(q.username));
    for (const auto& q : s.test) EXPECT_TRUE(s.test_users.contains(q.username));
    EXPECT_NEAR(s.train_fraction, 0.78, 0.03);
  }
}

TEST(Split, SeedDeterminism) {
  auto qs = questions_for_users(25, 9);
  auto a = split_dataset(qs, 0.78, 17);
  auto b = split_dataset(qs, 0.78, 17);
  EXPECT_EQ(a.train_users, b.train_users);
  EXPECT_EQ(a.train, b.train);
}

TEST(BuildQuestions, DeterministicAndConsistent) {
  std::vector<UserTimeline> corpus;
  for (int u = 0; u < 6; ++u) corpus.push_back(testing::reddit_user("u" + std::to_string(u), 20));
  HashingEmbedder emb(64);
  LexiconSentiment sent;
  QuestionSetConfig config;
  config.seed = 7;
  auto a = build_questions(corpus, reg(), config, emb, sent);
  auto b = build_questions(corpus, reg(), config, emb, sent);
  EXPECT_EQ(a.questions, b.questions);
  EXPECT_GT(a.questions.size(), 0u);
  for (const auto& q : a.questions) {
    std::set<std::string> texts;
    for (const auto& o : q.options) texts.insert(o.text);
    EXPECT_EQ(texts.size(), q.options.size());
    EXPECT_GE(q.behavior_index, 1u);
    if (q.kind != ElementKind::kType) {
      // Distractors come from other users only.
      for (const auto& o : q.options) {
        if (o.letter == q.gold_letter) continue;
        EXPECT_EQ(o.text.find(q.username + " "), std::string::npos) << o.text;
      }
    }
  }
}

}  // namespace
}  // namespace behavesim
