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


// Scoring and the evaluation runners built on it: plain multi-trial runs,
// history-window sweeps, prompt ablations and the reasoning-similarity
// profile.

#ifndef BEHAVESIM_EVALUATOR_H_
#define BEHAVESIM_EVALUATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/llm_gateway.h"
#include "behavesim/prompt_engine.h"
#include "behavesim/qa_builder.h"
#include "behavesim/text_features.h"

namespace behavesim {

// Macro-F1 in [0, 1] over `label_set`. A missing prediction is wrong for its
// gold label and counts against no label's precision; so does a prediction
// outside the label set. Labels with neither support nor predictions score
// 0 and still enter the mean. Throws LengthMismatch, and InvalidArgument
// for an empty label set or a gold outside it.
double score_macro_f1(const std::vector<std::optional<std::string>>& predictions,
                      const std::vector<std::string>& golds,
                      const std::vector<std::string>& label_set);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population
};
// Throws InvalidArgument for an empty list.
MeanStd mean_std(const std::vector<double>& values);

using CellKey = std::pair<Platform, ElementKind>;

struct Prediction {
  std::string question_id;
  std::optional<char> letter;
  char gold_letter = 'A';
  std::string error;  // error code name when letter is empty
  std::string raw_text;
};

struct CellScore {
  double f1 = 0.0;        // [0, 100]
  double accuracy = 0.0;  // [0, 100]
  std::size_t n = 0;
  std::size_t unparseable = 0;
};

struct TrialResult {
  std::size_t trial_index = 0;
  std::vector<Prediction> predictions;  // question order
  std::map<CellKey, CellScore> cells;
};

// Scores one trial per (platform, kind). Type questions are scored on type
// names, the others on letters. The label set of a cell is the union of its
// gold and predicted labels. Throws LengthMismatch.
TrialResult score_trial(const std::vector<ElementQuestion>& questions,
                        std::vector<Prediction> predictions,
                        std::size_t trial_index);

struct CellSummary {
  MeanStd f1;
  MeanStd accuracy;
  std::size_t n = 0;            // questions per trial
  std::size_t unparseable = 0;  // summed over trials
};

struct EvalReport {
  std::string label;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  bool single_trial = false;
  std::string config_json;  // snapshot of the run settings
  std::map<CellKey, CellSummary> cells;

  std::string to_json() const;
  static EvalReport from_json(std::string_view text);
};

// Throws InvalidArgument for an empty list.
EvalReport aggregate_trials(const std::vector<TrialResult>& trials);

struct EvalConfig {
  PromptConfig prompt;
  std::size_t trials = 3;
  std::string model_id = "default";
  double temperature = 0.1;
  int max_output = 1024;
  std::uint64_t seed = 0;
  std::string run_label = "eval";

  void validate() const;
  std::string to_json() const;
};

struct EvalRun {
  std::vector<TrialResult> trials;
  EvalReport report;
  std::size_t prompts_checked = 0;  // prompts scanned for history lines
};

// One request per question and trial. Prompts that must not carry history
// are scanned before dispatch (Internal if one does).
EvalRun run_evaluation(const std::vector<ElementQuestion>& questions,
                       const std::vector<UserTimeline>& timelines,
                       Gateway& gateway, const EvalConfig& config,
                       const TemplateSet& templates = TemplateSet::defaults());

// Builds every prompt the run would send, in question order.
std::vector<PromptBundle> build_prompts(
    const std::vector<ElementQuestion>& questions,
    const std::vector<UserTimeline>& timelines, const PromptConfig& config,
    const TemplateSet& templates = TemplateSet::defaults());

// Reads the answer letter from a reply, dropping the forbidden tag's
// segments first under a tag restriction.
char read_answer(std::string_view reply, std::size_t n_options,
                 TagRestriction tags);

inline const std::vector<std::size_t> kDefaultSweepWindows = {10, 20, 30, 40,
                                                               50, kAllHistory};
std::string window_label(std::size_t window);  // "all" for kAllHistory

struct SweepPoint {
  std::size_t window = 0;
  EvalReport report;
};

// Throws InvalidArgument for an empty window list.
std::vector<SweepPoint> history_sweep(
    const std::vector<ElementQuestion>& questions,
    const std::vector<UserTimeline>& timelines,
    const std::vector<std::size_t>& windows, Gateway& gateway,
    const EvalConfig& config,
    const TemplateSet& templates = TemplateSet::defaults());

enum class Ablation { kNone, kNoUserinfo, kNoInterest, kNoHistory, kOnlyAna, kOnlyMem };
std::string_view ablation_name(Ablation a);
Ablation parse_ablation(std::string_view name);

// Throws IncompatibleMethod for a tag ablation without OM-CoT.
PromptConfig apply_ablation(PromptConfig config, Ablation ablation);

EvalRun ablation_run(Ablation ablation,
                     const std::vector<ElementQuestion>& questions,
                     const std::vector<UserTimeline>& timelines,
                     Gateway& gateway, const EvalConfig& config,
                     const TemplateSet& templates = TemplateSet::defaults());

struct SimilarityRow {
  std::string section;  // "behavior_history", "options" or "role_profile"
  std::size_t bucket = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n = 0;
  std::optional<double> mean_correct;  // [0, 100], empty for empty buckets
};

// Equal-width bin of a similarity, negatives clamped into the lowest bin.
std::size_t similarity_bucket(double similarity, std::size_t buckets);

// Cosine of each reasoning text against three prompt parts, bucketed.
// Empty text has similarity 0. Throws LengthMismatch and InvalidArgument
// (buckets == 0); embedder failures propagate.
std::vector<SimilarityRow> similarity_profile(
    const std::vector<std::string>& responses,
    const std::vector<PromptBundle>& bundles,
    const std::vector<bool>& correct, Embedder& embedder,
    std::size_t buckets = 5);

// Tables. Numbers use fixed precision so equal inputs give equal bytes.
std::string report_csv(const EvalReport& report);
std::string ablation_csv(const std::vector<std::pair<std::string, EvalReport>>& rows);
std::string sweep_csv(const std::vector<SweepPoint>& points);
std::string similarity_csv(const std::vector<SimilarityRow>& rows);
std::string sweep_svg(const std::vector<SweepPoint>& points);
std::string predictions_jsonl(const std::vector<TrialResult>& trials);

}  // namespace behavesim

#endif  // BEHAVESIM_EVALUATOR_H_
