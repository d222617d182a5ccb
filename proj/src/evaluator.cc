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

#include "behavesim/evaluator.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "behavesim/response_parser.h"
#include "behavesim/text_util.h"
#include "json.hpp"

namespace behavesim {
namespace {

using Json = nlohmann::json;

using TimelineIndex = std::map<std::pair<Platform, std::string>, const UserTimeline*>;

TimelineIndex index_timelines(const std::vector<UserTimeline>& timelines) {
  TimelineIndex out;
  for (const auto& t : timelines) out[{t.profile.platform, t.profile.username}] = &t;
  return out;
}

const UserTimeline& timeline_for(const TimelineIndex& index,
                                 const ElementQuestion& q) {
  auto it = index.find({q.platform, q.username});
  if (it == index.end()) {
    fail(ErrorCode::kInconsistentQuestion,
         "no timeline for " + std::string(platform_name(q.platform)) + " user " +
             q.username + " (question " + q.question_id + ")");
  }
  return *it->second;
}

std::optional<std::string> label_of(const ElementQuestion& q,
                                    std::optional<char> letter) {
  if (!letter) return std::nullopt;
  if (q.kind != ElementKind::kType) return std::string(1, *letter);
  for (const auto& o : q.options) {
    if (o.letter == *letter) return o.text;
  }
  return std::nullopt;
}

bool history_forbidden(const PromptConfig& c) {
  return !c.include_history || c.history_window == 0;
}

}  // namespace

double score_macro_f1(const std::vector<std::optional<std::string>>& predictions,
                      const std::vector<std::string>& golds,
                      const std::vector<std::string>& label_set) {
  if (predictions.size() != golds.size()) {
    fail(ErrorCode::kLengthMismatch,
         std::to_string(predictions.size()) + " predictions for " +
             std::to_string(golds.size()) + " golds");
  }
  std::map<std::string, std::size_t> index;
  for (const auto& l : label_set) index.emplace(l, index.size());
  if (index.empty()) fail(ErrorCode::kInvalidArgument, "empty label set");

  std::vector<std::size_t> tp(index.size()), fp(index.size()), fn(index.size());
  for (std::size_t i = 0; i < golds.size(); ++i) {
    auto g = index.find(golds[i]);
    if (g == index.end()) {
      fail(ErrorCode::kInvalidArgument, "gold '" + golds[i] + "' is not a label");
    }
    const auto& p = predictions[i];
    if (p && *p == golds[i]) {
      ++tp[g->second];
      continue;
    }
    ++fn[g->second];
    if (p) {
      if (auto pi = index.find(*p); pi != index.end()) ++fp[pi->second];
    }
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < index.size(); ++l) {
    const auto denom = 2 * tp[l] + fp[l] + fn[l];
    if (denom) sum += 2.0 * static_cast<double>(tp[l]) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(index.size());
}

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) fail(ErrorCode::kInvalidArgument, "no values to aggregate");
  MeanStd out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

TrialResult score_trial(const std::vector<ElementQuestion>& questions,
                        std::vector<Prediction> predictions,
                        std::size_t trial_index) {
  if (questions.size() != predictions.size()) {
    fail(ErrorCode::kLengthMismatch,
         std::to_string(predictions.size()) + " predictions for " +
             std::to_string(questions.size()) + " questions");
  }
  struct Acc {
    std::vector<std::optional<std::string>> preds;
    std::vector<std::string> golds;
    std::set<std::string> labels;
    std::size_t correct = 0;
    std::size_t unparseable = 0;
  };
  std::map<CellKey, Acc> acc;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const auto& q = questions[i];
    auto& a = acc[{q.platform, q.kind}];
    auto gold = *label_of(q, q.gold_letter);
    auto pred = label_of(q, predictions[i].letter);
    a.golds.push_back(gold);
    a.labels.insert(gold);
    if (pred) a.labels.insert(*pred);
    if (!predictions[i].letter) ++a.unparseable;
    if (pred && *pred == gold) ++a.correct;
    a.preds.push_back(std::move(pred));
  }
  TrialResult out;
  out.trial_index = trial_index;
  for (auto& [key, a] : acc) {
    CellScore s;
    s.n = a.golds.size();
    s.unparseable = a.unparseable;
    s.f1 = 100.0 * score_macro_f1(a.preds, a.golds, {a.labels.begin(), a.labels.end()});
    s.accuracy = 100.0 * static_cast<double>(a.correct) / static_cast<double>(s.n);
    out.cells[key] = s;
  }
  out.predictions = std::move(predictions);
  return out;
}

EvalReport aggregate_trials(const std::vector<TrialResult>& trials) {
  if (trials.empty()) fail(ErrorCode::kInvalidArgument, "no trials to aggregate");
  EvalReport report;
  report.trials = trials.size();
  report.single_trial = trials.size() == 1;
  std::map<CellKey, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& t : trials) {
    for (const auto& [key, cell] : t.cells) {
      series[key].first.push_back(cell.f1);
      series[key].second.push_back(cell.accuracy);
      auto& summary = report.cells[key];
      summary.n = cell.n;
      summary.unparseable += cell.unparseable;
    }
  }
  for (auto& [key, s] : series) {
    report.cells[key].f1 = mean_std(s.first);
    report.cells[key].accuracy = mean_std(s.second);
  }
  return report;
}

std::string EvalReport::to_json() const {
  Json j;
  j["label"] = label;
  j["seed"] = seed;
  j["trials"] = trials;
  j["single_trial"] = single_trial;
  j["config"] = config_json.empty() ? Json::object() : Json::parse(config_json);
  Json cells_json = Json::array();
  for (const auto& [key, c] : cells) {
    cells_json.push_back({{"platform", std::string(platform_name(key.first))},
                          {"kind", std::string(element_kind_name(key.second))},
                          {"n", c.n},
                          {"unparseable", c.unparseable},
                          {"f1_mean", c.f1.mean},
                          {"f1_std", c.f1.stddev},
                          {"accuracy_mean", c.accuracy.mean},
                          {"accuracy_std", c.accuracy.stddev}});
  }
  j["cells"] = std::move(cells_json);
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(std::string_view text) {
  try {
    auto j = Json::parse(text);
    EvalReport r;
    r.label = j.at("label").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.trials = j.at("trials").get<std::size_t>();
    r.single_trial = j.at("single_trial").get<bool>();
    r.config_json = j.at("config").dump();
    for (const auto& c : j.at("cells")) {
      CellKey key{parse_platform(c.at("platform").get<std::string>()),
                  parse_element_kind(c.at("kind").get<std::string>())};
      CellSummary s;
      s.n = c.at("n").get<std::size_t>();
      s.unparseable = c.at("unparseable").get<std::size_t>();
      s.f1 = {c.at("f1_mean").get<double>(), c.at("f1_std").get<double>()};
      s.accuracy = {c.at("accuracy_mean").get<double>(),
                    c.at("accuracy_std").get<double>()};
      r.cells[key] = s;
    }
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kMalformedLine, std::string("bad report: ") + e.what());
  }
}

void EvalConfig::validate() const {
  prompt.validate();
  if (trials == 0) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    fail(ErrorCode::kInvalidArgument, "temperature must be in [0, 2]");
  }
}

std::string EvalConfig::to_json() const {
  Json j;
  j["method"] = std::string(prompt_method_name(prompt.method));
  j["history_window"] = window_label(prompt.history_window);
  j["include_userinfo"] = prompt.include_userinfo;
  j["include_interests"] = prompt.include_interests;
  j["include_history"] = prompt.include_history;
  j["tags"] = prompt.tags == TagRestriction::kBoth     ? "both"
              : prompt.tags == TagRestriction::kOnlyAna ? "only-ana"
                                                        : "only-mem";
  j["few_shot_examples"] = prompt.few_shot_examples.size();
  j["trials"] = trials;
  j["model_id"] = model_id;
  j["temperature"] = temperature;
  j["max_output"] = max_output;
  j["seed"] = seed;
  j["run_label"] = run_label;
  return j.dump();
}

std::vector<PromptBundle> build_prompts(
    const std::vector<ElementQuestion>& questions,
    const std::vector<UserTimeline>& timelines, const PromptConfig& config,
    const TemplateSet& templates) {
  auto index = index_timelines(timelines);
  std::vector<PromptBundle> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    out.push_back(assemble_prompt(q, timeline_for(index, q), config, templates));
  }
  return out;
}

char read_answer(std::string_view reply, std::size_t n_options,
                 TagRestriction tags) {
  switch (tags) {
    case TagRestriction::kOnlyAna:
      return extract_answer(strip_segments(reply, SegmentTag::kMem), n_options);
    case TagRestriction::kOnlyMem:
      return extract_answer(strip_segments(reply, SegmentTag::kAna), n_options);
    case TagRestriction::kBoth:
      break;
  }
  return extract_answer(reply, n_options);
}

EvalRun run_evaluation(const std::vector<ElementQuestion>& questions,
                       const std::vector<UserTimeline>& timelines,
                       Gateway& gateway, const EvalConfig& config,
                       const TemplateSet& templates) {
  config.validate();
  EvalRun run;
  auto bundles = build_prompts(questions, timelines, config.prompt, templates);
  if (history_forbidden(config.prompt)) {
    for (const auto& b : bundles) {
      if (count_history_lines(b.text()) != 0) {
        fail(ErrorCode::kInternal, "history line in a prompt that must have none");
      }
      ++run.prompts_checked;
    }
  }

  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    std::vector<CompletionRequest> requests;
    requests.reserve(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
      const auto& q = questions[i];
      CompletionRequest req;
      req.system_text = bundles[i].system_text();
      req.user_text = bundles[i].user_text();
      req.temperature = config.temperature;
      req.max_output = config.max_output;
      req.model_id = config.model_id;
      req.request_id = config.run_label + ":t" + std::to_string(trial) + ":" +
                       q.question_id;
      req.metadata = {
          {"question_id", q.question_id},
          {"stage", "eval"},
          {"gold_letter", std::string(1, q.gold_letter)},
          {"gold_text", q.gold().text},
          {"decision", decision_sentence(q.kind, q.gold_letter, q.gold().text)},
          {"n_options", std::to_string(q.options.size())},
          {"trial", std::to_string(trial)},
      };
      requests.push_back(std::move(req));
    }
    auto outcomes = gateway.complete_batch(requests);

    std::vector<Prediction> predictions(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) {
      auto& p = predictions[i];
      p.question_id = questions[i].question_id;
      p.gold_letter = questions[i].gold_letter;
      if (!outcomes[i].result) {
        p.error = std::string(error_code_name(outcomes[i].error));
        continue;
      }
      p.raw_text = outcomes[i].result->raw_text;
      try {
        p.letter = read_answer(p.raw_text, questions[i].options.size(),
                               config.prompt.tags);
      } catch (const Error& e) {
        p.error = std::string(error_code_name(e.code()));
      }
    }
    run.trials.push_back(score_trial(questions, std::move(predictions), trial));
  }
  run.report = aggregate_trials(run.trials);
  run.report.label = config.run_label;
  run.report.seed = config.seed;
  run.report.config_json = config.to_json();
  return run;
}

std::string window_label(std::size_t window) {
  return window == kAllHistory ? "all" : std::to_string(window);
}

std::vector<SweepPoint> history_sweep(
    const std::vector<ElementQuestion>& questions,
    const std::vector<UserTimeline>& timelines,
    const std::vector<std::size_t>& windows, Gateway& gateway,
    const EvalConfig& config, const TemplateSet& templates) {
  if (windows.empty()) fail(ErrorCode::kInvalidArgument, "no history windows");
  std::vector<SweepPoint> out;
  for (auto w : windows) {
    EvalConfig c = config;
    c.prompt.history_window = w;
    c.run_label = config.run_label + ":w" + window_label(w);
    out.push_back({w, run_evaluation(questions, timelines, gateway, c, templates).report});
  }
  return out;
}

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kNone:
      return "none";
    case Ablation::kNoUserinfo:
      return "no-userinfo";
    case Ablation::kNoInterest:
      return "no-interest";
    case Ablation::kNoHistory:
      return "no-history";
    case Ablation::kOnlyAna:
      return "only-ana";
    case Ablation::kOnlyMem:
      return "only-mem";
  }
  return "none";
}

Ablation parse_ablation(std::string_view name) {
  for (auto a : {Ablation::kNone, Ablation::kNoUserinfo, Ablation::kNoInterest,
                 Ablation::kNoHistory, Ablation::kOnlyAna, Ablation::kOnlyMem}) {
    if (iequals(ablation_name(a), name)) return a;
  }
  fail(ErrorCode::kInvalidArgument, "unknown ablation '" + std::string(name) + "'");
}

PromptConfig apply_ablation(PromptConfig config, Ablation ablation) {
  switch (ablation) {
    case Ablation::kNone:
      break;
    case Ablation::kNoUserinfo:
      config.include_userinfo = false;
      break;
    case Ablation::kNoInterest:
      config.include_interests = false;
      break;
    case Ablation::kNoHistory:
      config.include_history = false;
      break;
    case Ablation::kOnlyAna:
    case Ablation::kOnlyMem:
      if (config.method != PromptMethod::kOmCot) {
        fail(ErrorCode::kIncompatibleMethod,
             std::string(ablation_name(ablation)) + " needs method om-cot, not " +
                 std::string(prompt_method_name(config.method)));
      }
      config.tags = ablation == Ablation::kOnlyAna ? TagRestriction::kOnlyAna
                                                   : TagRestriction::kOnlyMem;
      break;
  }
  return config;
}

EvalRun ablation_run(Ablation ablation,
                     const std::vector<ElementQuestion>& questions,
                     const std::vector<UserTimeline>& timelines,
                     Gateway& gateway, const EvalConfig& config,
                     const TemplateSet& templates) {
  EvalConfig c = config;
  c.prompt = apply_ablation(config.prompt, ablation);
  c.run_label = config.run_label + ":" + std::string(ablation_name(ablation));
  return run_evaluation(questions, timelines, gateway, c, templates);
}

std::size_t similarity_bucket(double similarity, std::size_t buckets) {
  if (buckets == 0) fail(ErrorCode::kInvalidArgument, "buckets must be >= 1");
  const double s = std::clamp(similarity, 0.0, 1.0);
  return std::min(buckets - 1,
                  static_cast<std::size_t>(std::floor(s * static_cast<double>(buckets))));
}

std::vector<SimilarityRow> similarity_profile(
    const std::vector<std::string>& responses,
    const std::vector<PromptBundle>& bundles, const std::vector<bool>& correct,
    Embedder& embedder, std::size_t buckets) {
  if (responses.size() != bundles.size() || responses.size() != correct.size()) {
    fail(ErrorCode::kLengthMismatch, "responses, prompts and outcomes differ in length");
  }
  if (buckets == 0) fail(ErrorCode::kInvalidArgument, "buckets must be >= 1");

  struct Part {
    const char* name;
    std::string (*get)(const PromptBundle&);
  };
  static const Part kParts[] = {
      {"behavior_history",
       [](const PromptBundle& b) { return b.section(PromptSection::kBehaviorHistory); }},
      {"options", [](const PromptBundle& b) { return b.question_render; }},
      {"role_profile",
       [](const PromptBundle& b) { return b.section(PromptSection::kRoleProfile); }},
  };

  std::vector<std::string> texts;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    texts.push_back(responses[i]);
    for (const auto& p : kParts) texts.push_back(p.get(bundles[i]));
  }
  auto vectors = texts.empty() ? std::vector<Embedding>{} : embedder.embed(texts);
  if (vectors.size() != texts.size()) {
    fail(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong count");
  }

  const std::size_t stride = 1 + std::size(kParts);
  std::vector<SimilarityRow> rows;
  for (std::size_t p = 0; p < std::size(kParts); ++p) {
    std::vector<std::size_t> n(buckets), hits(buckets);
    for (std::size_t i = 0; i < responses.size(); ++i) {
      const auto& cot = vectors[i * stride];
      const auto& part = vectors[i * stride + 1 + p];
      const bool empty = trim(texts[i * stride]).empty() ||
                         trim(texts[i * stride + 1 + p]).empty();
      const double sim = empty ? 0.0 : cosine(cot, part);
      const auto b = similarity_bucket(sim, buckets);
      ++n[b];
      hits[b] += correct[i];
    }
    for (std::size_t b = 0; b < buckets; ++b) {
      SimilarityRow r;
      r.section = kParts[p].name;
      r.bucket = b;
      r.lower = static_cast<double>(b) / static_cast<double>(buckets);
      r.upper = static_cast<double>(b + 1) / static_cast<double>(buckets);
      r.n = n[b];
      if (n[b]) r.mean_correct = 100.0 * static_cast<double>(hits[b]) / static_cast<double>(n[b]);
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

}  // namespace behavesim
