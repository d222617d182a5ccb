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


// Builds tagged reasoning data for instruction tuning. A strong model writes
// reasoning while seeing the answer, a second model wraps it in <ANA>/<MEM>
// tags, and every result is re-validated before it is written out.

#ifndef BEHAVESIM_OMCOT_FORGE_H_
#define BEHAVESIM_OMCOT_FORGE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/llm_gateway.h"
#include "behavesim/prompt_engine.h"
#include "behavesim/qa_builder.h"
#include "behavesim/response_parser.h"

namespace behavesim {

struct ForgeConfig {
  std::string oracle_model = "oracle";
  std::string reorg_model = "reorganizer";
  int oracle_attempts = 3;
  int reorganize_attempts = 3;
  std::size_t ngram = 8;
  double max_overlap = 0.6;
  std::size_t history_window = 30;
  double temperature = 0.1;
  // 0 keeps every question; otherwise this many, split across element kinds
  // in proportion to their share of the input.
  std::size_t max_records = 0;
  std::uint64_t seed = 0;
  // Prefix for gateway request ids, so one gateway can serve several runs.
  std::string run_label = "forge";

  void validate() const;
};

struct OracleCot {
  std::string text;
  int attempt_count = 0;
  std::vector<LeakageReport> rejected;  // one per discarded attempt
};

// Throws LeakageUnfixable once every attempt leaked; gateway errors
// propagate.
OracleCot generate_oracle_cot(const ElementQuestion& question,
                              const UserTimeline& timeline, Gateway& gateway,
                              const ForgeConfig& config,
                              const TemplateSet& templates =
                                  TemplateSet::defaults());

struct ReorganizedCot {
  TaggedCot cot;
  int attempt_count = 0;
  bool decision_repaired = false;
};

// The returned reasoning always ends with the canonical decision naming the
// gold option. Throws MalformedTags (or MissingSegments) after the last
// attempt.
ReorganizedCot reorganize_cot(const std::string& raw_cot,
                              const ElementQuestion& question,
                              Gateway& gateway, const ForgeConfig& config,
                              const TemplateSet& templates =
                                  TemplateSet::defaults());

struct SftRecord {
  std::string system_text;
  std::string input_text;   // non-oracle OM-CoT prompt
  std::string output_text;  // tagged reasoning plus decision
  std::string question_id;
  Platform platform = Platform::kReddit;
  ElementKind kind = ElementKind::kType;

  bool operator==(const SftRecord&) const = default;
};

// {"system", "input", "output", "metadata": {...}} on one line.
std::string serialize_sft_record(const SftRecord& record);
SftRecord parse_sft_record(std::string_view line);
std::vector<SftRecord> read_sft_records(const std::string& path);

// Empty when the record satisfies every output invariant; otherwise the
// reasons it does not.
std::vector<std::string> check_sft_record(const SftRecord& record,
                                          const ElementQuestion& question);

struct ForgeReject {
  std::string question_id;
  std::string stage;  // "oracle", "reorganize" or "validate"
  std::string error;  // error code name or leak trigger
  std::string message;
};

struct ForgeManifest {
  ForgeConfig config;
  std::size_t questions = 0;
  std::size_t emitted = 0;
  std::size_t rejects = 0;
  std::size_t repaired_decisions = 0;
  std::map<std::string, std::size_t> reject_counts;
  std::map<std::string, std::size_t> emitted_by_kind;

  std::string to_json() const;
};

struct ForgeResult {
  std::vector<SftRecord> records;  // input order
  std::vector<ForgeReject> rejects;
  ForgeManifest manifest;
};

// Proportional sample (see ForgeConfig::max_records), in input order.
std::vector<ElementQuestion> sample_for_forge(
    const std::vector<ElementQuestion>& questions, std::size_t max_records,
    std::uint64_t seed);

ForgeResult run_forge(const std::vector<ElementQuestion>& questions,
                      const std::vector<UserTimeline>& timelines,
                      Gateway& gateway, const ForgeConfig& config,
                      const TemplateSet& templates = TemplateSet::defaults());

// Writes the records to `out_path` and the manifest to
// `out_path + ".manifest.json"`. Returns the number of records written.
// Throws IoError.
std::size_t emit_sft_records(const std::vector<SftRecord>& records,
                             const ForgeManifest& manifest,
                             const std::string& out_path);

void write_reject_log(const std::vector<ForgeReject>& rejects,
                      const std::string& path);

}  // namespace behavesim

#endif  // BEHAVESIM_OMCOT_FORGE_H_
