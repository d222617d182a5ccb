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


// Reading model output: answer letters, <ANA>/<MEM> tagged reasoning, and
// checks that oracle reasoning does not give the answer away.

#ifndef BEHAVESIM_RESPONSE_PARSER_H_
#define BEHAVESIM_RESPONSE_PARSER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace behavesim {

// Last decision pattern in `text` ("answer is (X)", "answer is X.",
// "is X.<label>", a lone "(X)"). Throws InvalidArgument when n_options is
// outside [2, 26], Unparseable when nothing matches and OutOfRange when
// the letter is beyond the options.
char extract_answer(std::string_view text, std::size_t n_options);

// Position of the final decision sentence ("Therefore, the ... is ...").
struct DecisionSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  char letter = 'A';
};
std::optional<DecisionSpan> find_decision_sentence(std::string_view text);

enum class SegmentTag { kAna, kMem };
std::string_view segment_tag_name(SegmentTag tag);  // "ANA" / "MEM"

struct Segment {
  SegmentTag tag;
  std::string text;

  bool operator==(const Segment&) const = default;
};

struct TaggedCot {
  std::vector<Segment> segments;  // textual order, trimmed
  std::string decision_sentence;
  char decided_letter = 'A';
  // Untagged text before the decision, kept for audit. untagged[i] precedes
  // segments[i]; the last entry sits between the final segment and the
  // decision.
  std::vector<std::string> untagged;
  std::string trailer;  // anything after the decision sentence

  std::string joined(SegmentTag tag) const;
  std::size_t count(SegmentTag tag) const;
  std::string render() const;

  bool operator==(const TaggedCot&) const = default;
};

// Throws MalformedTags, MissingSegments or MissingDecision, checked in that
// order.
TaggedCot parse_segments(std::string_view text);

// Collapses whitespace runs to one space, drops whitespace next to tags and
// trims the ends.
std::string normalize_whitespace(std::string_view text);

// Removes every <TAG>...</TAG> block of the given kind. Unbalanced tags are
// left untouched.
std::string strip_segments(std::string_view text, SegmentTag drop);

enum class LeakTrigger { kNone, kLetterBeforeDecision, kVerbatimOverlap };
std::string_view leak_trigger_name(LeakTrigger trigger);

struct LeakageReport {
  bool leaked = false;
  LeakTrigger trigger = LeakTrigger::kNone;
  double overlap_fraction = 0.0;  // share of gold n-grams found in the CoT
};

// Gold options shorter than this many words are too generic for the
// verbatim check to mean anything; their overlap is reported but ignored.
inline constexpr std::size_t kMinOverlapWords = 4;

// Fraction of distinct gold word n-grams (n = min(ngram, gold words)) that
// occur in `text`. 0 when the gold has no words.
double ngram_overlap(std::string_view text, std::string_view gold_text,
                     std::size_t ngram);

// The decision sentence itself is excluded from both checks.
LeakageReport detect_leakage(std::string_view cot_text,
                             std::string_view gold_option_text,
                             char gold_letter, std::size_t ngram = 8,
                             double max_overlap = 0.6);

}  // namespace behavesim

#endif  // BEHAVESIM_RESPONSE_PARSER_H_
