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

#include "behavesim/omcot_forge.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "behavesim/rng.h"
#include "behavesim/text_util.h"
#include "json.hpp"

namespace behavesim {
namespace {

using Json = nlohmann::json;

std::map<std::string, std::string> gold_metadata(const ElementQuestion& q,
                                                 std::string_view stage) {
  const auto& gold = q.gold();
  return {
      {"question_id", q.question_id},
      {"stage", std::string(stage)},
      {"gold_letter", std::string(1, q.gold_letter)},
      {"gold_text", gold.text},
      {"decision", decision_sentence(q.kind, q.gold_letter, gold.text)},
      {"n_options", std::to_string(q.options.size())},
  };
}

std::string canonical_decision(const ElementQuestion& q) {
  return decision_sentence(q.kind, q.gold_letter, q.gold().text);
}

Json config_json(const ForgeConfig& c) {
  return Json{{"oracle_model", c.oracle_model},
              {"reorg_model", c.reorg_model},
              {"oracle_attempts", c.oracle_attempts},
              {"reorganize_attempts", c.reorganize_attempts},
              {"ngram", c.ngram},
              {"max_overlap", c.max_overlap},
              {"history_window", c.history_window},
              {"temperature", c.temperature},
              {"max_records", c.max_records},
              {"seed", c.seed},
              {"run_label", c.run_label}};
}

}  // namespace

void ForgeConfig::validate() const {
  if (oracle_attempts < 1 || reorganize_attempts < 1) {
    fail(ErrorCode::kInvalidArgument, "forge attempts must be >= 1");
  }
  if (ngram == 0) fail(ErrorCode::kInvalidArgument, "ngram must be >= 1");
  if (!(max_overlap >= 0.0 && max_overlap <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "max_overlap must be in [0, 1]");
  }
}

OracleCot generate_oracle_cot(const ElementQuestion& question,
                              const UserTimeline& timeline, Gateway& gateway,
                              const ForgeConfig& config,
                              const TemplateSet& templates) {
  PromptConfig prompt;
  prompt.method = PromptMethod::kOmCotOracle;
  prompt.history_window = config.history_window;
  auto bundle = assemble_prompt(question, timeline, prompt, templates);

  OracleCot out;
  for (int attempt = 1; attempt <= config.oracle_attempts; ++attempt) {
    CompletionRequest req;
    req.system_text = bundle.system_text();
    req.user_text = bundle.user_text();
    req.temperature = config.temperature;
    req.model_id = config.oracle_model;
    req.request_id = config.run_label + ":oracle:" + question.question_id +
                     ":" + std::to_string(attempt);
    req.metadata = gold_metadata(question, "oracle");
    auto result = gateway.complete(req);
    auto leak = detect_leakage(result.raw_text, question.gold().text,
                               question.gold_letter, config.ngram,
                               config.max_overlap);
    out.attempt_count = attempt;
    if (!leak.leaked) {
      out.text = std::move(result.raw_text);
      return out;
    }
    out.rejected.push_back(leak);
  }
  fail(ErrorCode::kLeakageUnfixable,
       "oracle reasoning for " + question.question_id + " leaked the answer " +
           std::to_string(config.oracle_attempts) + " times (last trigger " +
           std::string(leak_trigger_name(out.rejected.back().trigger)) + ")");
}

ReorganizedCot reorganize_cot(const std::string& raw_cot,
                              const ElementQuestion& question,
                              Gateway& gateway, const ForgeConfig& config,
                              const TemplateSet& templates) {
  if (trim(raw_cot).empty()) {
    fail(ErrorCode::kInvalidArgument, "nothing to reorganize");
  }
  const auto lang = language_for(question.platform);
  const auto prompt = render_placeholders(
      templates.get("reorganize", lang),
      {{"reasoning", raw_cot}, {"decision_format", decision_format(question.kind)}});
  const auto decision = canonical_decision(question);

  ErrorCode last_code = ErrorCode::kMalformedTags;
  std::string last_message;
  for (int attempt = 1; attempt <= config.reorganize_attempts; ++attempt) {
    CompletionRequest req;
    req.user_text = prompt;
    req.temperature = config.temperature;
    req.model_id = config.reorg_model;
    req.request_id = config.run_label + ":reorganize:" + question.question_id +
                     ":" + std::to_string(attempt);
    req.metadata = gold_metadata(question, "reorganize");
    auto reply = gateway.complete(req).raw_text;

    ReorganizedCot out;
    out.attempt_count = attempt;
    try {
      out.cot = parse_segments(reply);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingDecision) {
        last_code = e.code();
        last_message = e.what();
        continue;
      }
      // Decisions are reconstructible from the gold, so repair instead of
      // rejecting.
      out.cot = parse_segments(std::string(trim(reply)) + "\n" + decision);
      out.decision_repaired = true;
    }
    if (out.cot.decided_letter != question.gold_letter ||
        out.cot.decision_sentence != decision) {
      out.decision_repaired = out.decision_repaired ||
                              out.cot.decided_letter != question.gold_letter;
      out.cot.decision_sentence = decision;
      out.cot.decided_letter = question.gold_letter;
    }
    out.cot.trailer.clear();
    return out;
  }
  fail(last_code, "reorganizing " + question.question_id + " failed " +
                      std::to_string(config.reorganize_attempts) +
                      " times: " + last_message);
}

std::string serialize_sft_record(const SftRecord& r) {
  Json j = Json::object();
  j["system"] = r.system_text;
  j["input"] = r.input_text;
  j["output"] = r.output_text;
  j["metadata"] = Json{{"question_id", r.question_id},
                       {"platform", std::string(platform_name(r.platform))},
                       {"kind", std::string(element_kind_name(r.kind))}};
  return j.dump();
}

SftRecord parse_sft_record(std::string_view line) {
  try {
    auto j = Json::parse(line);
    SftRecord r;
    r.system_text = j.at("system").get<std::string>();
    r.input_text = j.at("input").get<std::string>();
    r.output_text = j.at("output").get<std::string>();
    const auto& m = j.at("metadata");
    r.question_id = m.at("question_id").get<std::string>();
    r.platform = parse_platform(m.at("platform").get<std::string>());
    r.kind = parse_element_kind(m.at("kind").get<std::string>());
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kMalformedLine, std::string("bad SFT record: ") + e.what());
  }
}

std::vector<SftRecord> read_sft_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::vector<SftRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_sft_record(line));
    } catch (const Error& e) {
      fail(e.code(), path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> check_sft_record(const SftRecord& record,
                                          const ElementQuestion& question) {
  std::vector<std::string> problems;
  try {
    auto cot = parse_segments(record.output_text);
    if (cot.decided_letter != question.gold_letter) {
      problems.push_back("decision names " + std::string(1, cot.decided_letter) +
                         " instead of the gold option");
    }
  } catch (const Error& e) {
    problems.push_back(std::string(error_code_name(e.code())) + ": " + e.what());
  }
  auto leak = detect_leakage(record.output_text, question.gold().text,
                             question.gold_letter);
  if (leak.trigger == LeakTrigger::kLetterBeforeDecision) {
    problems.push_back("gold letter appears before the decision");
  }
  if (auto d = find_decision_sentence(record.output_text);
      !d || !trim(record.output_text.substr(d->end)).empty()) {
    problems.push_back("output does not end with the decision sentence");
  }
  if (record.input_text.find(kOracleMarker) != std::string::npos ||
      record.system_text.find(kOracleMarker) != std::string::npos) {
    problems.push_back("input carries the reference answer");
  }
  return problems;
}

std::string ForgeManifest::to_json() const {
  Json j;
  j["config"] = config_json(config);
  j["questions"] = questions;
  j["emitted"] = emitted;
  j["rejects"] = rejects;
  j["repaired_decisions"] = repaired_decisions;
  j["reject_counts"] = reject_counts;
  j["emitted_by_kind"] = emitted_by_kind;
  return j.dump(2) + "\n";
}

std::vector<ElementQuestion> sample_for_forge(
    const std::vector<ElementQuestion>& questions, std::size_t max_records,
    std::uint64_t seed) {
  if (max_records == 0 || max_records >= questions.size()) return questions;

  std::map<ElementKind, std::vector<std::size_t>> by_kind;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    by_kind[questions[i].kind].push_back(i);
  }
  // Largest-remainder allocation of max_records across kinds.
  std::vector<std::pair<ElementKind, std::size_t>> quota;
  std::vector<std::pair<double, ElementKind>> remainders;
  std::size_t assigned = 0;
  for (const auto& [kind, idx] : by_kind) {
    double exact = static_cast<double>(max_records) * idx.size() /
                   static_cast<double>(questions.size());
    auto base = static_cast<std::size_t>(exact);
    quota.emplace_back(kind, base);
    remainders.emplace_back(exact - static_cast<double>(base), kind);
    assigned += base;
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < max_records; ++i, ++assigned) {
    for (auto& [kind, n] : quota) {
      if (kind == remainders[i % remainders.size()].second) ++n;
    }
  }

  std::vector<std::size_t> keep;
  for (auto& [kind, n] : quota) {
    auto idx = by_kind[kind];
    SeededRng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
    rng.shuffle(idx);
    idx.resize(std::min(n, idx.size()));
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<ElementQuestion> out;
  out.reserve(keep.size());
  for (auto i : keep) out.push_back(questions[i]);
  return out;
}

ForgeResult run_forge(const std::vector<ElementQuestion>& input,
                      const std::vector<UserTimeline>& timelines,
                      Gateway& gateway, const ForgeConfig& config,
                      const TemplateSet& templates) {
  config.validate();
  const auto questions = sample_for_forge(input, config.max_records, config.seed);

  std::map<std::pair<Platform, std::string>, const UserTimeline*> by_user;
  for (const auto& t : timelines) {
    by_user[{t.profile.platform, t.profile.username}] = &t;
  }

  struct Slot {
    std::optional<SftRecord> record;
    std::optional<ForgeReject> reject;
    bool repaired = false;
  };
  std::vector<Slot> slots(questions.size());

  auto forge_one = [&](std::size_t i) {
    const auto& q = questions[i];
    auto& slot = slots[i];
    auto reject = [&](std::string stage, std::string error, std::string msg) {
      slot.reject = ForgeReject{q.question_id, std::move(stage),
                                std::move(error), std::move(msg)};
    };
    auto it = by_user.find({q.platform, q.username});
    if (it == by_user.end()) {
      reject("oracle", "InconsistentQuestion", "no timeline for " + q.username);
      return;
    }
    std::string stage = "oracle";
    try {
      auto oracle = generate_oracle_cot(q, *it->second, gateway, config, templates);
      stage = "reorganize";
      auto tagged = reorganize_cot(oracle.text, q, gateway, config, templates);

      PromptConfig prompt;
      prompt.method = PromptMethod::kOmCot;
      prompt.history_window = config.history_window;
      auto bundle = assemble_prompt(q, *it->second, prompt, templates);

      SftRecord r;
      r.system_text = bundle.system_text();
      r.input_text = bundle.user_text();
      r.output_text = tagged.cot.render();
      r.question_id = q.question_id;
      r.platform = q.platform;
      r.kind = q.kind;

      stage = "validate";
      auto leak = detect_leakage(r.output_text, q.gold().text, q.gold_letter,
                                 config.ngram, config.max_overlap);
      if (leak.trigger == LeakTrigger::kLetterBeforeDecision) {
        reject(stage, std::string(leak_trigger_name(leak.trigger)),
               "reorganized reasoning names the gold letter early");
        return;
      }
      if (auto problems = check_sft_record(r, q); !problems.empty()) {
        reject(stage, "InvalidRecord", problems.front());
        return;
      }
      slot.repaired = tagged.decision_repaired;
      slot.record = std::move(r);
    } catch (const Error& e) {
      reject(stage, std::string(error_code_name(e.code())), e.what());
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < questions.size(); i = next++) forge_one(i);
  };
  {
    const std::size_t n = std::min(gateway.concurrency(), questions.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  ForgeResult result;
  result.manifest.config = config;
  result.manifest.questions = questions.size();
  for (auto& slot : slots) {
    if (slot.record) {
      ++result.manifest.emitted_by_kind[std::string(element_kind_name(slot.record->kind))];
      result.manifest.repaired_decisions += slot.repaired;
      result.records.push_back(std::move(*slot.record));
    } else if (slot.reject) {
      ++result.manifest.reject_counts[slot.reject->error];
      result.rejects.push_back(std::move(*slot.reject));
    }
  }
  result.manifest.emitted = result.records.size();
  result.manifest.rejects = result.rejects.size();
  return result;
}

std::size_t emit_sft_records(const std::vector<SftRecord>& records,
                             const ForgeManifest& manifest,
                             const std::string& out_path) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + out_path);
  for (const auto& r : records) out << serialize_sft_record(r) << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed for " + out_path);

  ForgeManifest m = manifest;
  m.emitted = records.size();
  const auto manifest_path = out_path + ".manifest.json";
  std::ofstream mout(manifest_path, std::ios::binary | std::ios::trunc);
  if (!mout) fail(ErrorCode::kIoError, "cannot write " + manifest_path);
  mout << m.to_json();
  if (!mout) fail(ErrorCode::kIoError, "write failed for " + manifest_path);
  return records.size();
}

void write_reject_log(const std::vector<ForgeReject>& rejects,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& r : rejects) {
    out << Json{{"question_id", r.question_id},
                {"stage", r.stage},
                {"error", r.error},
                {"message", r.message}}
               .dump()
        << '\n';
  }
}

}  // namespace behavesim
