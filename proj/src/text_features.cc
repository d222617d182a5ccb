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

#include "behavesim/text_features.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "behavesim/text_util.h"

namespace behavesim {
namespace {

const std::unordered_set<std::string_view>& positive_words() {
  static const std::unordered_set<std::string_view> words = {
      "good",      "great",     "love",      "loved",      "loves",
      "like",      "nice",      "happy",     "excellent",  "amazing",
      "awesome",   "best",      "better",    "fantastic",  "wonderful",
      "glad",      "thanks",    "thank",     "win",        "winning",
      "beautiful", "brilliant", "enjoy",     "enjoyed",    "fun",
      "helpful",   "hope",      "perfect",   "proud",      "support",
      "agree",     "cool",      "excited",   "exciting",   "impressive",
      "incredible", "congrats", "congratulations", "success", "successful",
      "positive",  "strong",    "safe",      "recommend",  "worth",
      "solid",     "favorite",  "kind",      "fair",       "celebrate"};
  return words;
}

const std::unordered_set<std::string_view>& negative_words() {
  static const std::unordered_set<std::string_view> words = {
      "bad",       "terrible",  "hate",      "hated",     "awful",
      "worst",     "worse",     "sad",       "angry",     "horrible",
      "poor",      "fail",      "failed",    "failure",   "wrong",
      "broken",    "annoying",  "disappointing", "disappointed", "stupid",
      "useless",   "ugly",      "scam",      "lose",      "lost",
      "problem",   "problems",  "crisis",    "fear",      "afraid",
      "risky",     "risk",      "dangerous", "unfair",    "sucks",
      "toxic",     "corrupt",   "fake",      "frustrating", "frustrated",
      "expensive", "fees",      "slow",      "pain",      "painful",
      "disaster",  "outrage",   "mess",      "weak",      "negative"};
  return words;
}

const std::unordered_set<std::string_view>& negators() {
  static const std::unordered_set<std::string_view> words = {
      "not", "no", "never", "dont", "don", "isnt", "wasnt", "cant", "hardly"};
  return words;
}

// Chinese entries are matched as substrings.
constexpr std::string_view kZhPositive[] = {
    "喜欢", "支持", "优秀", "好看", "开心", "感谢", "推荐", "值得", "厉害",
    "精彩", "满意", "成功", "美好", "赞同", "幸福", "不错", "认可", "佩服"};
constexpr std::string_view kZhNegative[] = {
    "讨厌", "失望", "糟糕", "垃圾", "难过", "愤怒", "反对", "问题", "焦虑",
    "担心", "失败", "痛苦", "后悔", "骗", "恶心", "无聊", "崩溃", "可惜"};

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
  }
  for (float v : a) na += static_cast<double>(v) * v;
  for (float v : b) nb += static_cast<double>(v) * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<Embedding> HashingEmbedder::embed(
    const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    Embedding v(dim_, 0.0f);
    auto tokens = word_tokens(text);
    auto add = [&](std::string_view feature, float weight) {
      auto h = fnv1a64(feature);
      float sign = (h >> 63) ? -1.0f : 1.0f;
      v[h % dim_] += sign * weight;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      add(tokens[i], 1.0f);
      if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1], 0.5f);
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
      auto inv = static_cast<float>(1.0 / std::sqrt(norm));
      for (float& x : v) x *= inv;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string HashingEmbedder::name() const {
  return "hashing-" + std::to_string(dim_);
}

std::vector<Embedding> CachingEmbedder::embed(
    const std::vector<std::string>& texts) {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    std::unordered_set<std::string> queued;
    for (const auto& t : texts) {
      if (!cache_.contains(t) && queued.insert(t).second) missing.push_back(t);
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->embed(missing);
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_.emplace(missing[i], std::move(fresh[i]));
    }
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

double LexiconSentiment::score(std::string_view text) const {
  double pos = 0.0, neg = 0.0;
  auto tokens = word_tokens(text);
  bool negate = false;
  for (const auto& tok : tokens) {
    bool is_pos = positive_words().contains(tok);
    bool is_neg = negative_words().contains(tok);
    if (is_pos || is_neg) {
      if (is_pos != negate) {
        pos += 1.0;
      } else {
        neg += 1.0;
      }
      negate = false;
      continue;
    }
    negate = negators().contains(tok);
  }
  for (auto w : kZhPositive) pos += static_cast<double>(count_occurrences(text, w));
  for (auto w : kZhNegative) neg += static_cast<double>(count_occurrences(text, w));
  if (pos + neg == 0.0) return 0.0;
  return (pos - neg) / (pos + neg);
}

}  // namespace behavesim
