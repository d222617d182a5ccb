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

#include "behavesim/response_parser.h"

#include <regex>
#include <set>

#include "behavesim/error.h"
#include "behavesim/text_util.h"

namespace behavesim {
namespace {

struct TagToken {
  std::string_view literal;
  SegmentTag tag;
  bool closing;
};

constexpr TagToken kTagTokens[] = {
    {"<ANA>", SegmentTag::kAna, false},
    {"</ANA>", SegmentTag::kAna, true},
    {"<MEM>", SegmentTag::kMem, false},
    {"</MEM>", SegmentTag::kMem, true},
};

const TagToken* tag_at(std::string_view text, std::size_t pos) {
  for (const auto& t : kTagTokens) {
    if (text.substr(pos, t.literal.size()) == t.literal) return &t;
  }
  return nullptr;
}

const std::regex& decision_regex() {
  static const std::regex re(
      R"(Therefore, the [^\n]*? is (?:\(([A-Z])\)\.?|([A-Z])\.[^\n]*))");
  return re;
}

// Patterns accepted by extract_answer. Each has the letter in group 1.
const std::vector<std::regex>& answer_regexes() {
  static const std::vector<std::regex> res = {
      std::regex(R"(answer is \(([A-Z])\))"),
      std::regex(R"(answer is ([A-Z])\.)"),
      std::regex(R"(\bis ([A-Z])\.\S)"),
      std::regex(R"(\(([A-Z])\))"),
      std::regex("\xEF\xBC\x88([A-Z])\xEF\xBC\x89"),  // full-width parens
  };
  return res;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::set<std::string> ngram_set(const std::vector<std::string>& tokens,
                                std::size_t n) {
  std::set<std::string> out;
  if (n == 0 || tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += tokens[i + j];
    }
    out.insert(std::move(key));
  }
  return out;
}

double overlap_of(const std::vector<std::string_view>& parts,
                  std::string_view gold_text, std::size_t ngram) {
  auto gold = word_tokens(gold_text);
  if (gold.empty() || ngram == 0) return 0.0;
  const std::size_t n = std::min(ngram, gold.size());
  auto wanted = ngram_set(gold, n);
  std::set<std::string> seen;
  for (auto part : parts) {
    auto grams = ngram_set(word_tokens(part), n);
    seen.insert(grams.begin(), grams.end());
  }
  std::size_t hit = 0;
  for (const auto& g : wanted) hit += seen.count(g);
  return static_cast<double>(hit) / static_cast<double>(wanted.size());
}

}  // namespace

char extract_answer(std::string_view text, std::size_t n_options) {
  if (n_options < 2 || n_options > 26) {
    fail(ErrorCode::kInvalidArgument, "n_options must be in [2, 26]");
  }
  const std::string s(text);
  std::ptrdiff_t best_pos = -1;
  char letter = 0;
  for (const auto& re : answer_regexes()) {
    for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end;
         ++it) {
      if (it->position(1) > best_pos) {
        best_pos = it->position(1);
        letter = it->str(1)[0];
      }
    }
  }
  if (best_pos < 0) fail(ErrorCode::kUnparseable, "no decision pattern found");
  if (static_cast<std::size_t>(letter - 'A') >= n_options) {
    fail(ErrorCode::kOutOfRange, std::string("answer ") + letter +
                                     " is beyond " +
                                     std::to_string(n_options) + " options");
  }
  return letter;
}

std::optional<DecisionSpan> find_decision_sentence(std::string_view text) {
  const std::string s(text);
  std::optional<DecisionSpan> last;
  for (std::sregex_iterator it(s.begin(), s.end(), decision_regex()), end;
       it != end; ++it) {
    DecisionSpan span;
    span.begin = static_cast<std::size_t>(it->position(0));
    span.end = span.begin + static_cast<std::size_t>(it->length(0));
    span.letter = (*it)[1].matched ? it->str(1)[0] : it->str(2)[0];
    last = span;
  }
  return last;
}

std::string_view segment_tag_name(SegmentTag tag) {
  return tag == SegmentTag::kAna ? "ANA" : "MEM";
}

std::string TaggedCot::joined(SegmentTag tag) const {
  std::string out;
  for (const auto& s : segments) {
    if (s.tag != tag) continue;
    if (!out.empty()) out += "\n";
    out += s.text;
  }
  return out;
}

std::size_t TaggedCot::count(SegmentTag tag) const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.tag == tag;
  return n;
}

std::string TaggedCot::render() const {
  std::string out;
  for (std::size_t i = 0; i <= segments.size(); ++i) {
    if (i < untagged.size() && !untagged[i].empty()) {
      out += untagged[i];
      out += '\n';
    }
    if (i == segments.size()) break;
    const auto name = segment_tag_name(segments[i].tag);
    out += "<";
    out += name;
    out += ">";
    out += segments[i].text;
    out += "</";
    out += name;
    out += ">\n";
  }
  out += decision_sentence;
  if (!trailer.empty()) {
    out += '\n';
    out += trailer;
  }
  return out;
}

TaggedCot parse_segments(std::string_view text) {
  TaggedCot cot;
  std::optional<SegmentTag> open;
  std::size_t open_at = 0;
  std::size_t cursor = 0;  // end of the last closed tag
  std::size_t last_close = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const TagToken* t = text[pos] == '<' ? tag_at(text, pos) : nullptr;
    if (!t) {
      ++pos;
      continue;
    }
    if (!t->closing) {
      if (open) {
        fail(ErrorCode::kMalformedTags,
             "nested <" + std::string(segment_tag_name(t->tag)) + "> at byte " +
                 std::to_string(pos));
      }
      cot.untagged.emplace_back(trim(text.substr(cursor, pos - cursor)));
      open = t->tag;
      open_at = pos + t->literal.size();
    } else {
      if (!open || *open != t->tag) {
        fail(ErrorCode::kMalformedTags,
             "unexpected </" + std::string(segment_tag_name(t->tag)) +
                 "> at byte " + std::to_string(pos));
      }
      cot.segments.push_back(
          {t->tag, std::string(trim(text.substr(open_at, pos - open_at)))});
      open.reset();
      cursor = last_close = pos + t->literal.size();
    }
    pos += t->literal.size();
  }
  if (open) {
    fail(ErrorCode::kMalformedTags,
         "unclosed <" + std::string(segment_tag_name(*open)) + ">");
  }
  if (cot.count(SegmentTag::kAna) == 0 || cot.count(SegmentTag::kMem) == 0) {
    fail(ErrorCode::kMissingSegments,
         "reasoning needs at least one <ANA> and one <MEM> segment");
  }
  auto tail = text.substr(last_close);
  auto decision = find_decision_sentence(tail);
  if (!decision) {
    fail(ErrorCode::kMissingDecision,
         "no decision sentence after the last tagged segment");
  }
  cot.untagged.emplace_back(trim(tail.substr(0, decision->begin)));
  cot.decision_sentence =
      std::string(trim(tail.substr(decision->begin, decision->end - decision->begin)));
  cot.decided_letter = decision->letter;
  cot.trailer = std::string(trim(tail.substr(decision->end)));
  return cot;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool after_tag = false;
  for (std::size_t pos = 0; pos < text.size();) {
    if (is_space(text[pos])) {
      while (pos < text.size() && is_space(text[pos])) ++pos;
      if (!after_tag && !out.empty() && pos < text.size()) out += ' ';
      continue;
    }
    if (const TagToken* t = text[pos] == '<' ? tag_at(text, pos) : nullptr) {
      if (!out.empty() && out.back() == ' ') out.pop_back();
      out += t->literal;
      pos += t->literal.size();
      after_tag = true;
      continue;
    }
    out += text[pos++];
    after_tag = false;
  }
  return out;
}

std::string strip_segments(std::string_view text, SegmentTag drop) {
  const std::string open = "<" + std::string(segment_tag_name(drop)) + ">";
  const std::string close = "</" + std::string(segment_tag_name(drop)) + ">";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto b = text.find(open, pos);
    if (b == std::string_view::npos) break;
    auto e = text.find(close, b + open.size());
    if (e == std::string_view::npos) break;
    out += text.substr(pos, b - pos);
    pos = e + close.size();
  }
  out += text.substr(pos);
  return out;
}

std::string_view leak_trigger_name(LeakTrigger trigger) {
  switch (trigger) {
    case LeakTrigger::kNone:
      return "none";
    case LeakTrigger::kLetterBeforeDecision:
      return "LetterBeforeDecision";
    case LeakTrigger::kVerbatimOverlap:
      return "VerbatimOverlap";
  }
  return "none";
}

double ngram_overlap(std::string_view text, std::string_view gold_text,
                     std::size_t ngram) {
  return overlap_of({text}, gold_text, ngram);
}

LeakageReport detect_leakage(std::string_view cot_text,
                             std::string_view gold_option_text,
                             char gold_letter, std::size_t ngram,
                             double max_overlap) {
  std::string_view before = cot_text;
  std::string_view after;
  if (auto d = find_decision_sentence(cot_text)) {
    before = cot_text.substr(0, d->begin);
    after = cot_text.substr(d->end);
  }
  LeakageReport report;
  report.overlap_fraction = overlap_of({before, after}, gold_option_text, ngram);

  const std::string ascii = std::string("(") + gold_letter + ")";
  const std::string wide =
      std::string("\xEF\xBC\x88") + gold_letter + "\xEF\xBC\x89";
  if (before.find(ascii) != std::string_view::npos ||
      before.find(wide) != std::string_view::npos) {
    report.leaked = true;
    report.trigger = LeakTrigger::kLetterBeforeDecision;
    return report;
  }
  if (word_tokens(gold_option_text).size() >= kMinOverlapWords &&
      report.overlap_fraction > max_overlap) {
    report.leaked = true;
    report.trigger = LeakTrigger::kVerbatimOverlap;
  }
  return report;
}

}  // namespace behavesim
