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

// Prompt assembly. A prompt has four sections (task description, role
// profile, behavior history, method instructions) followed by the rendered
// question. Ablated sections stay in place as empty strings.

#ifndef BEHAVESIM_PROMPT_ENGINE_H_
#define BEHAVESIM_PROMPT_ENGINE_H_

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/qa_builder.h"

namespace behavesim {

enum class PromptMethod { kZeroShot, kFewShot, kStdCot, kOmCot, kOmCotOracle };
std::string_view prompt_method_name(PromptMethod method);
PromptMethod parse_prompt_method(std::string_view name);

// Restricts OM-CoT reasoning to one of the two tags.
enum class TagRestriction { kBoth, kOnlyAna, kOnlyMem };

enum class Language { kEnglish, kChinese };
// Chinese for Zhihu, English otherwise.
Language language_for(Platform platform);

inline constexpr std::size_t kAllHistory = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kHistoryFieldCap = 280;
// Precedes the gold answer in oracle prompts; never appears elsewhere.
inline constexpr std::string_view kOracleMarker = "[REFERENCE ANSWER]";

struct PromptConfig {
  std::size_t history_window = 30;  // kAllHistory for the full history
  bool include_userinfo = true;
  bool include_interests = true;
  bool include_history = true;
  PromptMethod method = PromptMethod::kZeroShot;
  TagRestriction tags = TagRestriction::kBoth;
  std::vector<std::string> few_shot_examples;
  // With no explicit examples, use the bundled one for each question's
  // language.
  bool bundled_few_shot = false;

  // Throws MissingFewShotExamples or IncompatibleMethod.
  void validate() const;
};

// Named text templates with "{{placeholder}}" fields. Defaults are bundled;
// a directory may override any file by name.
class TemplateSet {
 public:
  static const TemplateSet& defaults();
  // Bundled templates overlaid with every *.txt file found in `dir`.
  static TemplateSet with_overrides(const std::string& dir);

  // `name` without language suffix, e.g. "method_omcot". Leading lines that
  // start with ";;" are comments and are stripped.
  const std::string& get(std::string_view name, Language lang) const;

 private:
  std::map<std::string, std::string, std::less<>> files_;
};

enum class PromptSection {
  kTaskDescription = 0,
  kRoleProfile = 1,
  kBehaviorHistory = 2,
  kMethodInstructions = 3,
};

struct PromptBundle {
  std::array<std::string, 4> sections;
  std::string question_render;

  const std::string& section(PromptSection s) const {
    return sections[static_cast<std::size_t>(s)];
  }

  // Start offsets of the four sections and the question, then total size.
  std::array<std::size_t, 6> offsets() const;
  // sections[0..3] followed by question_render.
  std::string text() const;
  // Task description, sent as the system message.
  const std::string& system_text() const { return sections[0]; }
  // Everything after the task description.
  std::string user_text() const;
};

// "Therefore, the behavior type is X.<label>" style for type questions and
// "Therefore, the answer is (X)." otherwise.
std::string decision_sentence(ElementKind kind, char letter,
                              std::string_view label);
// The same sentence with placeholders, as shown to the model.
std::string decision_format(ElementKind kind);

// One line per behavior: "- [time] type | target: ... | content: ...",
// each field capped at kHistoryFieldCap characters.
std::string render_history_line(const BehaviorRecord& b);

// Number of lines in `text` that look like rendered history lines.
std::size_t count_history_lines(std::string_view text);

// Indices of the behaviors shown as history: the `window` most recent
// behaviors strictly earlier than the gold behavior's timestamp.
std::vector<std::size_t> history_indices(const UserTimeline& timeline,
                                         std::size_t behavior_index,
                                         std::size_t window);

// `question` is required for the oracle variant (its gold is embedded) and
// for picking the decision template.
std::string render_method_instructions(const PromptConfig& config,
                                       const ElementQuestion& question,
                                       const TemplateSet& templates =
                                           TemplateSet::defaults());

// Throws InconsistentQuestion when the question does not belong to the
// timeline or its gold option disagrees with the recorded behavior.
PromptBundle assemble_prompt(const ElementQuestion& question,
                             const UserTimeline& timeline,
                             const PromptConfig& config,
                             const TemplateSet& templates =
                                 TemplateSet::defaults());

// Bundled few-shot demonstration for the language.
std::string default_few_shot_example(Language lang);

}  // namespace behavesim

#endif  // BEHAVESIM_PROMPT_ENGINE_H_
