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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "behavesim/error.h"
#include "behavesim/rng.h"
#include "behavesim/text_util.h"
#include "json.hpp"

namespace behavesim {
namespace {

using Json = nlohmann::ordered_json;

const std::string& element_text(const BehaviorRecord& b, ElementKind kind) {
  switch (kind) {
    case ElementKind::kObject:
      return *b.target;
    case ElementKind::kContent:
      return *b.content;
    case ElementKind::kType:
      break;
  }
  return b.type_name;
}

bool within_window(UtcSeconds a, UtcSeconds b, std::chrono::days window) {
  auto diff = a > b ? a - b : b - a;
  return diff <= window;
}

bool by_similarity(const Candidate& a, const Candidate& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.text < b.text;
}

}  // namespace

std::string_view element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::kObject:
      return "object";
    case ElementKind::kType:
      return "type";
    case ElementKind::kContent:
      return "content";
  }
  return "unknown";
}

ElementKind parse_element_kind(std::string_view name) {
  for (auto kind : kAllElementKinds) {
    if (iequals(trim(name), element_kind_name(kind))) return kind;
  }
  fail(ErrorCode::kInvalidArgument,
       "unknown element kind '" + std::string(name) + "'");
}

std::string_view pool_relaxation_name(PoolRelaxation r) {
  switch (r) {
    case PoolRelaxation::kNone:
      return "none";
    case PoolRelaxation::kDroppedCommunity:
      return "dropped_community";
    case PoolRelaxation::kDroppedTime:
      return "dropped_time";
  }
  return "unknown";
}

const Option& ElementQuestion::option(char letter) const {
  for (const auto& o : options) {
    if (o.letter == letter) return o;
  }
  fail(ErrorCode::kOutOfRange,
       std::string("question ") + question_id + " has no option " + letter);
}

const Option& ElementQuestion::gold() const { return option(gold_letter); }

std::vector<QuestionDraft> decompose(const UserTimeline& timeline,
                                     std::size_t behavior_index,
                                     const BehaviorRegistry& registry) {
  if (behavior_index >= timeline.behaviors.size()) {
    fail(ErrorCode::kInvalidArgument,
         "behavior index " + std::to_string(behavior_index) + " out of range");
  }
  if (behavior_index == 0) {
    fail(ErrorCode::kNoHistory, "the first behavior has no history");
  }
  const auto& b = timeline.behaviors[behavior_index];
  const auto& spec = registry.lookup(timeline.profile.platform, b.type_name);
  std::vector<QuestionDraft> drafts;
  auto add = [&](ElementKind kind) {
    QuestionDraft d;
    d.username = timeline.profile.username;
    d.platform = timeline.profile.platform;
    d.kind = kind;
    d.behavior_index = behavior_index;
    d.gold_text = element_text(b, kind);
    d.timestamp = b.timestamp;
    d.community = b.community;
    drafts.push_back(std::move(d));
  };
  if (spec.needs_target) add(ElementKind::kObject);
  add(ElementKind::kType);
  if (spec.needs_content) add(ElementKind::kContent);
  return drafts;
}

CorpusIndex::CorpusIndex(const std::vector<UserTimeline>& corpus,
                         Embedder& embedder, const Sentimenter& sentimenter) {
  std::vector<std::string> texts;
  std::vector<std::pair<std::pair<Platform, ElementKind>, std::size_t>> slots;
  for (const auto& t : corpus) {
    for (const auto& b : t.behaviors) {
      for (auto kind : {ElementKind::kObject, ElementKind::kContent}) {
        const auto& field = kind == ElementKind::kObject ? b.target : b.content;
        if (!field) continue;
        auto key = std::make_pair(t.profile.platform, kind);
        auto& bucket = entries_[key];
        Entry e;
        e.text = *field;
        e.username = t.profile.username;
        e.timestamp = b.timestamp;
        e.community = b.community;
        e.sentiment = sentimenter.score(e.text);
        slots.emplace_back(key, bucket.size());
        texts.push_back(e.text);
        bucket.push_back(std::move(e));
        user_texts_[{t.profile.username, kind}].insert(*field);
      }
    }
  }
  if (!texts.empty()) {
    auto vectors = embedder.embed(texts);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      entries_[slots[i].first][slots[i].second].embedding =
          std::move(vectors[i]);
    }
  }
}

const std::vector<CorpusIndex::Entry>& CorpusIndex::entries(
    Platform platform, ElementKind kind) const {
  static const std::vector<Entry> kEmpty;
  auto it = entries_.find({platform, kind});
  return it == entries_.end() ? kEmpty : it->second;
}

const std::set<std::string>& CorpusIndex::user_texts(
    const std::string& username, ElementKind kind) const {
  static const std::set<std::string> kEmpty;
  auto it = user_texts_.find({username, kind});
  return it == user_texts_.end() ? kEmpty : it->second;
}

CandidatePool build_candidate_pool(const CorpusIndex& index,
                                   const QuestionDraft& gold,
                                   const PoolConfig& config,
                                   Embedder& embedder,
                                   const Sentimenter& sentimenter) {
  if (gold.kind == ElementKind::kType) {
    fail(ErrorCode::kInvalidArgument, "type questions have no candidate pool");
  }
  const auto& entries = index.entries(gold.platform, gold.kind);
  const auto& own = index.user_texts(gold.username, gold.kind);

  // Stage 0: same community and window; 1: window only; 2: unconstrained.
  auto admits = [&](const CorpusIndex::Entry& e, int stage) {
    if (stage == 0 && gold.community && e.community != gold.community) {
      return false;
    }
    if (stage <= 1 && !within_window(e.timestamp, gold.timestamp, config.window)) {
      return false;
    }
    return true;
  };

  std::vector<const CorpusIndex::Entry*> chosen;
  PoolRelaxation relaxation = PoolRelaxation::kNone;
  for (int stage = 0; stage <= 2; ++stage) {
    chosen.clear();
    std::unordered_set<std::string_view> seen;
    for (const auto& e : entries) {
      if (e.username == gold.username || e.text == gold.gold_text ||
          own.contains(e.text) || !admits(e, stage)) {
        continue;
      }
      if (seen.insert(e.text).second) chosen.push_back(&e);
    }
    if (chosen.size() >= kDistractorCount) {
      relaxation = static_cast<PoolRelaxation>(stage);
      break;
    }
    if (stage == 2) {
      fail(ErrorCode::kPoolTooSmall,
           "only " + std::to_string(chosen.size()) +
               " candidate texts for question on " + gold.username);
    }
  }

  CandidatePool pool;
  pool.gold_text = gold.gold_text;
  pool.gold_sentiment = sentimenter.score(gold.gold_text);
  pool.relaxation = relaxation;
  auto gold_vec = embedder.embed_one(gold.gold_text);
  pool.candidates.reserve(chosen.size());
  for (const auto* e : chosen) {
    pool.candidates.push_back(
        {e->text, cosine(gold_vec, e->embedding), e->sentiment, e->username});
  }
  std::sort(pool.candidates.begin(), pool.candidates.end(), by_similarity);
  if (pool.candidates.size() > config.pool_cap) {
    pool.candidates.resize(config.pool_cap);
  }
  return pool;
}

CandidatePool build_candidate_pool(const std::vector<UserTimeline>& corpus,
                                   const QuestionDraft& gold,
                                   const PoolConfig& config,
                                   Embedder& embedder,
                                   const Sentimenter& sentimenter) {
  if (corpus.empty()) fail(ErrorCode::kInvalidArgument, "empty corpus");
  CorpusIndex index(corpus, embedder, sentimenter);
  return build_candidate_pool(index, gold, config, embedder, sentimenter);
}

std::vector<std::string> DistractorSample::texts() const {
  std::vector<std::string> out;
  out.reserve(chosen.size());
  for (const auto& c : chosen) out.push_back(c.text);
  return out;
}

DistractorSample sample_distractors(const CandidatePool& pool,
                                    const DistractorConfig& config,
                                    std::uint64_t seed) {
  const std::size_t k = kDistractorCount;
  if (config.top_k < k) {
    fail(ErrorCode::kInvalidArgument, "top_k must be at least 3");
  }
  if (pool.candidates.size() < k) {
    fail(ErrorCode::kPoolTooSmall, "candidate pool smaller than 3");
  }
  std::vector<Candidate> top(pool.candidates.begin(),
                             pool.candidates.begin() +
                                 std::min(config.top_k, pool.candidates.size()));
  std::sort(top.begin(), top.end(), by_similarity);

  auto gap = [&](const Candidate& c) {
    return std::abs(c.sentiment - pool.gold_sentiment);
  };
  std::vector<Candidate> eligible, rest;
  for (auto& c : top) {
    (gap(c) <= config.tau ? eligible : rest).push_back(c);
  }

  DistractorSample out;
  out.eligible = eligible.size();
  SeededRng rng(seed);
  if (eligible.size() >= k) {
    // Partial Fisher-Yates: the first k slots are a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);
    }
    eligible.resize(k);
    out.chosen = std::move(eligible);
    return out;
  }
  out.chosen = std::move(eligible);
  std::stable_sort(rest.begin(), rest.end(),
                   [&](const Candidate& a, const Candidate& b) {
                     return gap(a) < gap(b);
                   });
  for (std::size_t i = 0; out.chosen.size() < k; ++i) {
    out.chosen.push_back(rest[i]);
    ++out.refilled;
  }
  return out;
}

std::string make_question_id(const QuestionDraft& draft) {
  return ascii_lower(platform_name(draft.platform)) + ":" + draft.username +
         ":" + std::to_string(draft.behavior_index) + ":" +
         std::string(element_kind_name(draft.kind));
}

ElementQuestion assemble_question(const QuestionDraft& draft,
                                  const std::vector<std::string>& distractors,
                                  const BehaviorRegistry& registry,
                                  std::uint64_t seed) {
  std::vector<std::string> texts;
  if (draft.kind == ElementKind::kType) {
    for (const auto* spec : registry.types_for(draft.platform)) {
      texts.push_back(spec->type_name);
    }
    if (std::find(texts.begin(), texts.end(), draft.gold_text) == texts.end()) {
      fail(ErrorCode::kUnknownBehaviorType,
           "gold type '" + draft.gold_text + "' not in registry");
    }
  } else {
    if (distractors.size() != kDistractorCount) {
      fail(ErrorCode::kInvalidArgument,
           "object/content questions need exactly 3 distractors");
    }
    texts.push_back(draft.gold_text);
    texts.insert(texts.end(), distractors.begin(), distractors.end());
  }
  if (texts.size() > 26) {
    fail(ErrorCode::kInvalidArgument, "more than 26 options");
  }
  std::set<std::string_view> unique(texts.begin(), texts.end());
  if (unique.size() != texts.size()) {
    fail(ErrorCode::kDuplicateOptionText,
         "duplicate option text in question " + make_question_id(draft));
  }

  SeededRng rng(splitmix64(seed));
  rng.shuffle(texts);

  ElementQuestion q;
  q.question_id = make_question_id(draft);
  q.username = draft.username;
  q.platform = draft.platform;
  q.kind = draft.kind;
  q.behavior_index = draft.behavior_index;
  q.created_with_seed = seed;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    char letter = static_cast<char>('A' + i);
    if (texts[i] == draft.gold_text) q.gold_letter = letter;
    q.options.push_back({letter, std::move(texts[i])});
  }
  return q;
}

QuestionSet build_questions(const std::vector<UserTimeline>& corpus,
                            const BehaviorRegistry& registry,
                            const QuestionSetConfig& config,
                            Embedder& embedder,
                            const Sentimenter& sentimenter) {
  std::vector<const UserTimeline*> users;
  for (const auto& t : corpus) users.push_back(&t);
  std::sort(users.begin(), users.end(), [](const auto* a, const auto* b) {
    return std::tie(a->profile.platform, a->profile.username) <
           std::tie(b->profile.platform, b->profile.username);
  });

  CorpusIndex index(corpus, embedder, sentimenter);
  QuestionSet out;
  std::uint64_t ordinal = 0;
  for (const auto* user : users) {
    for (std::size_t i = 1; i < user->behaviors.size(); ++i) {
      ++out.stats.behaviors;
      for (const auto& draft : decompose(*user, i, registry)) {
        ++out.stats.drafts;
        const std::uint64_t seed = derive_seed(config.seed, ordinal++);
        std::vector<std::string> distractors;
        if (draft.kind != ElementKind::kType) {
          try {
            auto pool = build_candidate_pool(index, draft, config.pool,
                                             embedder, sentimenter);
            ++out.stats.relaxations[std::string(
                pool_relaxation_name(pool.relaxation))];
            auto sample = sample_distractors(pool, config.distractors, seed);
            if (sample.refilled > 0) ++out.stats.refilled_questions;
            distractors = sample.texts();
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kPoolTooSmall) throw;
            ++out.stats.dropped_pool_too_small;
            continue;
          }
        }
        out.questions.push_back(
            assemble_question(draft, distractors, registry, seed));
      }
    }
  }
  out.stats.questions = out.questions.size();
  return out;
}

SplitResult split_dataset(const std::vector<ElementQuestion>& questions,
                          double ratio, std::uint64_t seed) {
  if (questions.empty()) {
    fail(ErrorCode::kInvalidArgument, "cannot split an empty question set");
  }
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "split ratio must be in [0, 1]");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& q : questions) ++counts[q.username];
  std::vector<std::pair<std::string, std::size_t>> users(counts.begin(),
                                                         counts.end());
  SeededRng rng(seed);
  rng.shuffle(users);

  const double total = static_cast<double>(questions.size());
  auto error = [&](double train_count) {
    return std::abs(train_count / total - ratio);
  };

  std::vector<bool> in_train(users.size(), false);
  double train_count = 0.0;
  {
    std::size_t best_m = 0;
    double best_err = error(0.0), acc = 0.0;
    for (std::size_t m = 1; m <= users.size(); ++m) {
      acc += static_cast<double>(users[m - 1].second);
      if (error(acc) < best_err) {
        best_err = error(acc);
        best_m = m;
      }
    }
    for (std::size_t m = 0; m < best_m; ++m) {
      in_train[m] = true;
      train_count += static_cast<double>(users[m].second);
    }
  }
  // Local search: single moves, then pairwise swaps, while error drops.
  for (bool improved = true; improved;) {
    improved = false;
    double best_err = error(train_count);
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t a = 0; a < users.size(); ++a) {
      double delta = in_train[a] ? -static_cast<double>(users[a].second)
                                 : static_cast<double>(users[a].second);
      if (error(train_count + delta) + 1e-15 < best_err) {
        best_err = error(train_count + delta);
        best = {a, a};
      }
      if (!in_train[a]) continue;
      for (std::size_t b = 0; b < users.size(); ++b) {
        if (in_train[b]) continue;
        double swapped = train_count - static_cast<double>(users[a].second) +
                         static_cast<double>(users[b].second);
        if (error(swapped) + 1e-15 < best_err) {
          best_err = error(swapped);
          best = {a, b};
        }
      }
    }
    if (best) {
      auto [a, b] = *best;
      for (auto idx : a == b ? std::vector<std::size_t>{a}
                             : std::vector<std::size_t>{a, b}) {
        train_count += in_train[idx] ? -static_cast<double>(users[idx].second)
                                     : static_cast<double>(users[idx].second);
        in_train[idx] = !in_train[idx];
      }
      improved = true;
    }
  }

  SplitResult out;
  out.requested_ratio = ratio;
  for (std::size_t i = 0; i < users.size(); ++i) {
    (in_train[i] ? out.train_users : out.test_users).insert(users[i].first);
  }
  for (const auto& q : questions) {
    (out.train_users.contains(q.username) ? out.train : out.test).push_back(q);
  }
  out.train_fraction = static_cast<double>(out.train.size()) / total;
  if (ratio > 0.0 && ratio < 1.0 && (out.train.empty() || out.test.empty())) {
    out.warning = "only " + std::to_string(users.size()) +
                  " user(s): cannot populate both splits";
  }
  return out;
}

std::string serialize_question(const ElementQuestion& q) {
  Json j;
  j["question_id"] = q.question_id;
  j["username"] = q.username;
  j["platform"] = std::string(platform_name(q.platform));
  j["kind"] = std::string(element_kind_name(q.kind));
  j["behavior_index"] = q.behavior_index;
  Json options = Json::array();
  for (const auto& o : q.options) {
    options.push_back({{"letter", std::string(1, o.letter)}, {"text", o.text}});
  }
  j["options"] = std::move(options);
  j["gold_letter"] = std::string(1, q.gold_letter);
  j["created_with_seed"] = q.created_with_seed;
  return j.dump();
}

ElementQuestion parse_question(std::string_view line) {
  try {
    auto j = Json::parse(line);
    ElementQuestion q;
    q.question_id = j.at("question_id").get<std::string>();
    q.username = j.at("username").get<std::string>();
    q.platform = parse_platform(j.at("platform").get<std::string>());
    q.kind = parse_element_kind(j.at("kind").get<std::string>());
    q.behavior_index = j.at("behavior_index").get<std::size_t>();
    for (const auto& o : j.at("options")) {
      auto letter = o.at("letter").get<std::string>();
      if (letter.size() != 1) throw std::invalid_argument("bad letter");
      q.options.push_back({letter[0], o.at("text").get<std::string>()});
    }
    auto gold = j.at("gold_letter").get<std::string>();
    if (gold.size() != 1) throw std::invalid_argument("bad gold letter");
    q.gold_letter = gold[0];
    q.created_with_seed = j.at("created_with_seed").get<std::uint64_t>();
    q.gold();  // validates the gold letter
    return q;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kMalformedLine, std::string("bad question record: ") + e.what());
  }
}

void write_questions(const std::vector<ElementQuestion>& questions,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& q : questions) out << serialize_question(q) << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path);
}

std::vector<ElementQuestion> read_questions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::vector<ElementQuestion> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_question(line));
    } catch (const Error& e) {
      fail(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace behavesim
