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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "behavesim/error.h"
#include "behavesim/text_util.h"
#include "behavesim_assets.h"

namespace behavesim {
namespace {

std::string strip_comments(std::string_view raw) {
  std::string_view rest = raw;
  while (rest.starts_with(";;")) {
    auto nl = rest.find('\n');
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  }
  // Templates end without a trailing newline; sections add their own.
  while (!rest.empty() && (rest.back() == '\n' || rest.back() == '\r')) {
    rest.remove_suffix(1);
  }
  return std::string(rest);
}

std::string_view lang_suffix(Language lang) {
  return lang == Language::kChinese ? "zh" : "en";
}

struct Labels {
  std::string_view profile_heading;
  std::string_view username;
  std::string_view description;
  std::string_view interests;
  std::string_view history_heading;
  std::string_view question;
  std::string_view happens_at;
  std::string_view options;
};

const Labels& labels(Language lang) {
  static const Labels en{"Role profile:",
                         "Username: ",
                         "Description: ",
                         "Interests:",
                         "Behavior history (oldest first):",
                         "Question: ",
                         "The behavior happens at ",
                         "Options:"};
  static const Labels zh{"角色资料：",
                         "用户名：",
                         "简介：",
                         "兴趣：",
                         "历史行为（按时间先后）：",
                         "问题：",
                         "该行为发生于 ",
                         "选项："};
  return lang == Language::kChinese ? zh : en;
}

std::string_view element_label(ElementKind kind, Language lang) {
  if (lang == Language::kChinese) {
    switch (kind) {
      case ElementKind::kObject:
        return "行为对象";
      case ElementKind::kType:
        return "行为类型";
      case ElementKind::kContent:
        return "行为内容";
    }
  }
  switch (kind) {
    case ElementKind::kObject:
      return "object (the target it acts on)";
    case ElementKind::kType:
      return "type";
    case ElementKind::kContent:
      return "content (the text the user writes)";
  }
  return "";
}

std::string_view question_stem(ElementKind kind, Language lang) {
  if (lang == Language::kChinese) {
    switch (kind) {
      case ElementKind::kObject:
        return "该用户下一个行为的对象是哪一个？";
      case ElementKind::kType:
        return "该用户下一个行为的类型是哪一个？";
      case ElementKind::kContent:
        return "该用户下一个行为的内容是哪一个？";
    }
  }
  switch (kind) {
    case ElementKind::kObject:
      return "Which target will the user act on in their next behavior?";
    case ElementKind::kType:
      return "Which type of behavior will the user perform next?";
    case ElementKind::kContent:
      return "What content will the user write in their next behavior?";
  }
  return "";
}

std::string method_template_name(const PromptConfig& config) {
  switch (config.method) {
    case PromptMethod::kZeroShot:
      return "method_zero_shot";
    case PromptMethod::kFewShot:
      return "method_few_shot";
    case PromptMethod::kStdCot:
      return "method_std_cot";
    case PromptMethod::kOmCotOracle:
      return "method_omcot_oracle";
    case PromptMethod::kOmCot:
      break;
  }
  switch (config.tags) {
    case TagRestriction::kOnlyAna:
      return "method_omcot_only_ana";
    case TagRestriction::kOnlyMem:
      return "method_omcot_only_mem";
    case TagRestriction::kBoth:
      break;
  }
  return "method_omcot";
}

const std::string& element_text(const BehaviorRecord& b, ElementKind kind) {
  static const std::string kMissing;
  switch (kind) {
    case ElementKind::kObject:
      return b.target ? *b.target : kMissing;
    case ElementKind::kContent:
      return b.content ? *b.content : kMissing;
    case ElementKind::kType:
      break;
  }
  return b.type_name;
}

}  // namespace

std::string_view prompt_method_name(PromptMethod method) {
  switch (method) {
    case PromptMethod::kZeroShot:
      return "zero-shot";
    case PromptMethod::kFewShot:
      return "few-shot";
    case PromptMethod::kStdCot:
      return "std-cot";
    case PromptMethod::kOmCot:
      return "om-cot";
    case PromptMethod::kOmCotOracle:
      return "om-cot-oracle";
  }
  return "unknown";
}

PromptMethod parse_prompt_method(std::string_view name) {
  for (auto m : {PromptMethod::kZeroShot, PromptMethod::kFewShot,
                 PromptMethod::kStdCot, PromptMethod::kOmCot,
                 PromptMethod::kOmCotOracle}) {
    if (iequals(trim(name), prompt_method_name(m))) return m;
  }
  fail(ErrorCode::kInvalidArgument,
       "unknown prompt method '" + std::string(name) + "'");
}

Language language_for(Platform platform) {
  return platform == Platform::kZhihu ? Language::kChinese : Language::kEnglish;
}

void PromptConfig::validate() const {
  if (method == PromptMethod::kFewShot && few_shot_examples.empty() &&
      !bundled_few_shot) {
    fail(ErrorCode::kMissingFewShotExamples,
         "few-shot prompting needs at least one example");
  }
  if (tags != TagRestriction::kBoth && method != PromptMethod::kOmCot) {
    fail(ErrorCode::kIncompatibleMethod,
         "tag restriction requires the om-cot method");
  }
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [name, content] : assets::kTemplates) {
      s.files_.emplace(std::string(name), strip_comments(content));
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::string& dir) {
  namespace fs = std::filesystem;
  TemplateSet s = defaults();
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    fail(ErrorCode::kIoError, "template directory not found: " + dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    s.files_[entry.path().filename().string()] = strip_comments(buf.str());
  }
  return s;
}

const std::string& TemplateSet::get(std::string_view name,
                                    Language lang) const {
  std::string key = std::string(name) + "." + std::string(lang_suffix(lang)) + ".txt";
  auto it = files_.find(key);
  if (it == files_.end()) {
    fail(ErrorCode::kIoError, "missing prompt template " + key);
  }
  return it->second;
}

std::array<std::size_t, 6> PromptBundle::offsets() const {
  std::array<std::size_t, 6> out{};
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = pos;
    pos += sections[i].size();
  }
  out[4] = pos;
  out[5] = pos + question_render.size();
  return out;
}

std::string PromptBundle::text() const {
  std::string out;
  for (const auto& s : sections) out += s;
  out += question_render;
  return out;
}

std::string PromptBundle::user_text() const {
  std::string out;
  for (std::size_t i = 1; i < 4; ++i) out += sections[i];
  out += question_render;
  return out;
}

std::string decision_format(ElementKind kind) {
  return kind == ElementKind::kType
             ? "Therefore, the behavior type is <letter>.<type name>"
             : "Therefore, the answer is (<letter>).";
}

std::string decision_sentence(ElementKind kind, char letter,
                              std::string_view label) {
  if (kind == ElementKind::kType) {
    return "Therefore, the behavior type is " + std::string(1, letter) + "." +
           std::string(label);
  }
  return "Therefore, the answer is (" + std::string(1, letter) + ").";
}

std::string render_history_line(const BehaviorRecord& b) {
  std::string line = "- [" + format_timestamp(b.timestamp) + "] " + b.type_name;
  if (b.target) {
    line += " | target: " + utf8_truncate(single_line(*b.target), kHistoryFieldCap);
  }
  if (b.content) {
    line += " | content: " + utf8_truncate(single_line(*b.content), kHistoryFieldCap);
  }
  return line;
}

std::size_t count_history_lines(std::string_view text) {
  static const std::regex kLine(R"(^- \[\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}\] )");
  std::size_t n = 0;
  for (auto line : split(text, '\n')) {
    std::string s(line);
    if (std::regex_search(s, kLine)) ++n;
  }
  return n;
}

std::vector<std::size_t> history_indices(const UserTimeline& timeline,
                                         std::size_t behavior_index,
                                         std::size_t window) {
  const auto gold_ts = timeline.behaviors.at(behavior_index).timestamp;
  std::vector<std::size_t> earlier;
  for (std::size_t j = 0; j < behavior_index; ++j) {
    if (timeline.behaviors[j].timestamp < gold_ts) earlier.push_back(j);
  }
  if (window < earlier.size()) {
    earlier.erase(earlier.begin(),
                  earlier.end() - static_cast<std::ptrdiff_t>(window));
  }
  return earlier;
}

std::string render_method_instructions(const PromptConfig& config,
                                       const ElementQuestion& question,
                                       const TemplateSet& templates) {
  config.validate();
  const Language lang = language_for(question.platform);
  std::vector<std::pair<std::string, std::string>> values = {
      {"decision_format", decision_format(question.kind)},
  };
  if (config.method == PromptMethod::kFewShot) {
    std::string joined;
    for (const auto& ex : config.few_shot_examples) {
      if (!joined.empty()) joined += "\n\n";
      joined += ex;
    }
    if (joined.empty()) joined = default_few_shot_example(lang);
    values.emplace_back("examples", joined);
  }
  if (config.method == PromptMethod::kOmCotOracle) {
    const auto& gold = question.gold();
    values.emplace_back("oracle_marker", std::string(kOracleMarker));
    values.emplace_back("gold_letter", std::string(1, gold.letter));
    values.emplace_back("gold_text", single_line(gold.text));
  }
  return render_placeholders(templates.get(method_template_name(config), lang),
                             values);
}

PromptBundle assemble_prompt(const ElementQuestion& question,
                             const UserTimeline& timeline,
                             const PromptConfig& config,
                             const TemplateSet& templates) {
  config.validate();
  const auto& profile = timeline.profile;
  if (question.username != profile.username ||
      question.platform != profile.platform ||
      question.behavior_index >= timeline.behaviors.size()) {
    fail(ErrorCode::kInconsistentQuestion,
         "question " + question.question_id + " does not match timeline of " +
             profile.username);
  }
  const auto& gold_behavior = timeline.behaviors[question.behavior_index];
  if (question.gold().text != element_text(gold_behavior, question.kind)) {
    fail(ErrorCode::kInconsistentQuestion,
         "gold option of " + question.question_id +
             " differs from the recorded behavior");
  }

  const Language lang = language_for(profile.platform);
  const Labels& l = labels(lang);
  PromptBundle bundle;

  bundle.sections[0] =
      render_placeholders(templates.get("task_description", lang),
                          {{"platform", std::string(platform_name(profile.platform))},
                           {"username", profile.username},
                           {"element", std::string(element_label(question.kind, lang))}}) +
      "\n\n";

  std::string role;
  if (config.include_userinfo) {
    role += std::string(l.username) + profile.username + "\n";
    if (!profile.description.empty()) {
      role += std::string(l.description) + single_line(profile.description) + "\n";
    }
  }
  if (config.include_interests && !profile.interests.empty()) {
    role += std::string(l.interests) + "\n";
    for (const auto& interest : profile.interests) {
      role += "* " + single_line(interest) + "\n";
    }
  }
  if (!role.empty()) bundle.sections[1] = std::string(l.profile_heading) + "\n" + role + "\n";

  if (config.include_history) {
    auto indices = history_indices(timeline, question.behavior_index,
                                   config.history_window);
    if (!indices.empty()) {
      std::string history = std::string(l.history_heading) + "\n";
      for (auto j : indices) history += render_history_line(timeline.behaviors[j]) + "\n";
      bundle.sections[2] = history + "\n";
    }
  }

  bundle.sections[3] = render_method_instructions(config, question, templates) + "\n\n";

  std::string q = std::string(l.question) + std::string(question_stem(question.kind, lang)) +
                  "\n" + std::string(l.happens_at) +
                  format_timestamp(gold_behavior.timestamp) + "\n" +
                  std::string(l.options) + "\n";
  for (const auto& o : question.options) {
    q += std::string(1, o.letter) + ". " +
         utf8_truncate(single_line(o.text), kHistoryFieldCap) + "\n";
  }
  bundle.question_render = std::move(q);
  return bundle;
}

std::string default_few_shot_example(Language lang) {
  return TemplateSet::defaults().get("fewshot_example", lang);
}

}  // namespace behavesim
