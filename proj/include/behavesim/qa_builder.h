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

// Multiple-choice question construction.
//
// Each behavior is split into up to three element questions (object, type,
// content). Object and content questions get three distractors drawn from
// other users' texts: a candidate pool is built from the same platform,
// community and time window, ranked by embedding similarity to the gold
// text, and the distractors are sampled from the top of that ranking among
// candidates whose sentiment is close to the gold's. Type questions list
// every registry type of the platform.

#ifndef BEHAVESIM_QA_BUILDER_H_
#define BEHAVESIM_QA_BUILDER_H_

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/text_features.h"

namespace behavesim {

enum class ElementKind { kObject, kType, kContent };

inline constexpr std::array<ElementKind, 3> kAllElementKinds = {
    ElementKind::kObject, ElementKind::kType, ElementKind::kContent};

// "object", "type", "content".
std::string_view element_kind_name(ElementKind kind);
ElementKind parse_element_kind(std::string_view name);

inline constexpr std::size_t kDistractorCount = 3;

struct QuestionDraft {
  std::string username;
  Platform platform = Platform::kReddit;
  ElementKind kind = ElementKind::kType;
  std::size_t behavior_index = 0;
  std::string gold_text;  // target, type name or content
  UtcSeconds timestamp{};
  std::optional<std::string> community;
};

struct Option {
  char letter = 'A';
  std::string text;

  friend bool operator==(const Option&, const Option&) = default;
};

struct ElementQuestion {
  std::string question_id;
  std::string username;
  Platform platform = Platform::kReddit;
  ElementKind kind = ElementKind::kType;
  std::size_t behavior_index = 0;
  std::vector<Option> options;
  char gold_letter = 'A';
  std::uint64_t created_with_seed = 0;

  const Option& gold() const;
  // Throws OutOfRange for a letter that is not an option.
  const Option& option(char letter) const;

  friend bool operator==(const ElementQuestion&,
                         const ElementQuestion&) = default;
};

// Drafts for one behavior: always Type, plus Object iff the type needs a
// target and Content iff it needs content. Throws NoHistory for index 0.
std::vector<QuestionDraft> decompose(const UserTimeline& timeline,
                                     std::size_t behavior_index,
                                     const BehaviorRegistry& registry);

struct Candidate {
  std::string text;
  double similarity = 0.0;
  double sentiment = 0.0;
  std::string source_user;
};

enum class PoolRelaxation { kNone, kDroppedCommunity, kDroppedTime };
std::string_view pool_relaxation_name(PoolRelaxation r);

struct CandidatePool {
  std::string gold_text;
  double gold_sentiment = 0.0;
  // Sorted by similarity descending, ties by text.
  std::vector<Candidate> candidates;
  PoolRelaxation relaxation = PoolRelaxation::kNone;
};

struct PoolConfig {
  std::chrono::days window{7};
  std::size_t pool_cap = 200;
};

// Pre-embedded behavior texts of a corpus, grouped by (platform, kind).
// Only object and content texts are indexed.
class CorpusIndex {
 public:
  struct Entry {
    std::string text;
    std::string username;
    UtcSeconds timestamp{};
    std::optional<std::string> community;
    Embedding embedding;
    double sentiment = 0.0;
  };

  CorpusIndex(const std::vector<UserTimeline>& corpus, Embedder& embedder,
              const Sentimenter& sentimenter);

  const std::vector<Entry>& entries(Platform platform, ElementKind kind) const;
  // Every text the user produced for `kind`.
  const std::set<std::string>& user_texts(const std::string& username,
                                          ElementKind kind) const;

 private:
  std::map<std::pair<Platform, ElementKind>, std::vector<Entry>> entries_;
  std::map<std::pair<std::string, ElementKind>, std::set<std::string>>
      user_texts_;
};

// Candidates come from other users' texts of the same platform and element
// kind, never equal to any text of the gold user. Constraints are relaxed
// (community first, then time window) until at least kDistractorCount
// distinct texts remain. Throws PoolTooSmall.
CandidatePool build_candidate_pool(const CorpusIndex& index,
                                   const QuestionDraft& gold,
                                   const PoolConfig& config,
                                   Embedder& embedder,
                                   const Sentimenter& sentimenter);

CandidatePool build_candidate_pool(const std::vector<UserTimeline>& corpus,
                                   const QuestionDraft& gold,
                                   const PoolConfig& config,
                                   Embedder& embedder,
                                   const Sentimenter& sentimenter);

struct DistractorConfig {
  double tau = 0.3;
  std::size_t top_k = 20;
};

struct DistractorSample {
  std::vector<Candidate> chosen;  // in sampled order
  std::size_t eligible = 0;       // top-K entries within tau
  std::size_t refilled = 0;       // picks taken by nearest sentiment gap

  std::vector<std::string> texts() const;
};

// Eligible = top_k by similarity, filtered to |sentiment gap| <= tau;
// samples kDistractorCount uniformly from it, refilling from the rest of
// the top_k by ascending sentiment gap when short. Throws PoolTooSmall.
DistractorSample sample_distractors(const CandidatePool& pool,
                                    const DistractorConfig& config,
                                    std::uint64_t seed);

// Options are gold + distractors (object/content) or the platform's full
// type list (type), shuffled with `seed`. Throws DuplicateOptionText.
ElementQuestion assemble_question(const QuestionDraft& draft,
                                  const std::vector<std::string>& distractors,
                                  const BehaviorRegistry& registry,
                                  std::uint64_t seed);

std::string make_question_id(const QuestionDraft& draft);

struct QuestionSetConfig {
  PoolConfig pool;
  DistractorConfig distractors;
  std::uint64_t seed = 0;
};

struct QuestionSetStats {
  std::size_t behaviors = 0;
  std::size_t drafts = 0;
  std::size_t questions = 0;
  std::size_t dropped_pool_too_small = 0;
  std::size_t refilled_questions = 0;
  std::map<std::string, std::size_t> relaxations;
};

struct QuestionSet {
  std::vector<ElementQuestion> questions;
  QuestionSetStats stats;
};

// Users are processed in (platform, username) order, behaviors in timeline
// order from index 1; each question's seed is derive_seed(seed, ordinal).
QuestionSet build_questions(const std::vector<UserTimeline>& corpus,
                            const BehaviorRegistry& registry,
                            const QuestionSetConfig& config,
                            Embedder& embedder,
                            const Sentimenter& sentimenter);

struct SplitResult {
  std::set<std::string> train_users;
  std::set<std::string> test_users;
  std::vector<ElementQuestion> train;
  std::vector<ElementQuestion> test;
  double requested_ratio = 0.78;
  double train_fraction = 0.0;  // achieved, by question count
  std::optional<std::string> warning;
};

// Partitions users (not questions) so the train question fraction is as
// close to `ratio` as a seeded shuffle plus single swaps can get it.
SplitResult split_dataset(const std::vector<ElementQuestion>& questions,
                          double ratio, std::uint64_t seed);

// Line-delimited JSON, one question per line.
std::string serialize_question(const ElementQuestion& q);
ElementQuestion parse_question(std::string_view line);
void write_questions(const std::vector<ElementQuestion>& questions,
                     const std::string& path);
std::vector<ElementQuestion> read_questions(const std::string& path);

}  // namespace behavesim

#endif  // BEHAVESIM_QA_BUILDER_H_
