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

#include <gtest/gtest.h>

#include <cmath>

#include "behavesim/rng.h"
#include "test_support.h"

namespace behavesim {
namespace {

using testing::code_of;
using testing::no_sleep_options;
using testing::SmallWorld;
using Preds = std::vector<std::optional<std::string>>;

// Textbook macro-F1 from a full confusion matrix: per-label precision and
// recall, F1 = 2PR/(P+R), 0 when undefined.
double oracle_macro_f1(const Preds& preds, const std::vector<std::string>& golds,
                       const std::vector<std::string>& labels) {
  const std::size_t k = labels.size();
  auto index = [&](const std::optional<std::string>& s) -> std::size_t {
    if (!s) return k;
    auto it = std::find(labels.begin(), labels.end(), *s);
    return it == labels.end() ? k : static_cast<std::size_t>(it - labels.begin());
  };
  std::vector<std::vector<double>> m(k + 1, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < golds.size(); ++i) m[index(golds[i])][index(preds[i])] += 1.0;
  double total = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    double tp = m[l][l], predicted = 0.0, actual = 0.0;
    for (std::size_t j = 0; j <= k; ++j) {
      if (j < k) predicted += m[j][l];
      actual += m[l][j];
    }
    double p = predicted > 0 ? tp / predicted : 0.0;
    double r = actual > 0 ? tp / actual : 0.0;
    total += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return total / static_cast<double>(k);
}

TEST(MacroF1, HandExample) {
  Preds p = {"A", "B", "A", "C"};
  std::vector<std::string> g = {"A", "B", "B", "C"};
  EXPECT_NEAR(score_macro_f1(p, g, {"A", "B", "C"}), (2.0 / 3 + 2.0 / 3 + 1.0) / 3, 1e-15);
}

TEST(MacroF1, PerfectAndUnparseable) {
  std::vector<std::string> g = {"A", "B", "C", "A"};
  EXPECT_DOUBLE_EQ(score_macro_f1({"A", "B", "C", "A"}, g, {"A", "B", "C"}), 1.0);
  EXPECT_DOUBLE_EQ(score_macro_f1(Preds(4), g, {"A", "B", "C"}), 0.0);
}

TEST(MacroF1, Errors) {
  EXPECT_EQ(code_of([] { score_macro_f1({"A"}, {"A", "B"}, {"A", "B"}); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(code_of([] { score_macro_f1({"A"}, {"A"}, {}); }), ErrorCode::kInvalidArgument);
}

TEST(MacroF1, MatchesConfusionMatrixOracle) {
  SeededRng rng(31337);
  for (int instance = 0; instance < 500; ++instance) {
    std::size_t k = 1 + rng.below(6);
    std::size_t n = 1 + rng.below(50);
    std::vector<std::string> labels;
    for (std::size_t l = 0; l < k; ++l) labels.push_back(std::string(1, char('A' + l)));
    Preds preds;
    std::vector<std::string> golds;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(labels[rng.below(k)]);
      auto r = rng.below(k + 2);
      if (r < k) {
        preds.push_back(labels[r]);
      } else if (r == k) {
        preds.push_back(std::nullopt);
      } else {
        preds.push_back(std::string("Z"));  // outside the label set
      }
    }
    EXPECT_NEAR(score_macro_f1(preds, golds, labels), oracle_macro_f1(preds, golds, labels),
                1e-12);
  }
}

TEST(MeanStd, Examples) {
  auto c = mean_std({62.92, 62.92, 62.92});
  EXPECT_DOUBLE_EQ(c.mean, 62.92);
  EXPECT_NEAR(c.stddev, 0.0, 1e-12);
  auto d = mean_std({60, 64});
  EXPECT_DOUBLE_EQ(d.mean, 62.0);
  EXPECT_DOUBLE_EQ(d.stddev, 2.0);
}

EvalConfig config(std::size_t trials = 1) {
  EvalConfig c;
  c.trials = trials;
  return c;
}

Gateway mock(const char* spec) {
  return Gateway(std::make_shared<MockBackend>(MockPolicy::parse(spec)), no_sleep_options());
}

TEST(RunEvaluation, AlwaysGoldIsPerfectEverywhere) {
  SmallWorld w;
  auto gw = mock("always-gold");
  auto run = run_evaluation(w.questions, w.corpus, gw, config(3));
  EXPECT_EQ(run.report.trials, 3u);
  EXPECT_FALSE(run.report.single_trial);
  ASSERT_FALSE(run.report.cells.empty());
  for (const auto& [key, cell] : run.report.cells) {
    EXPECT_EQ(cell.f1.mean, 100.0);
    EXPECT_EQ(cell.accuracy.mean, 100.0);
    EXPECT_EQ(cell.f1.stddev, 0.0);
  }
}

TEST(RunEvaluation, FixedLetterAccuracyIsShareOfGoldsAtThatLetter) {
  SmallWorld w;
  auto gw = mock("fixed-letter:A");
  auto run = run_evaluation(w.questions, w.corpus, gw, config());
  std::map<CellKey, std::pair<double, double>> share;
  for (const auto& q : w.questions) {
    auto& s = share[{q.platform, q.kind}];
    s.first += q.gold_letter == 'A';
    s.second += 1;
  }
  for (const auto& [key, cell] : run.report.cells) {
    EXPECT_DOUBLE_EQ(cell.accuracy.mean, 100.0 * share[key].first / share[key].second);
  }
  EXPECT_TRUE(run.report.single_trial);
}

TEST(RunEvaluation, SingleTrialFlag) {
  SmallWorld w;
  auto gw = mock("uniform-random:1");
  auto run = run_evaluation(w.questions, w.corpus, gw, config(1));
  EXPECT_TRUE(run.report.single_trial);
  for (const auto& [key, cell] : run.report.cells) EXPECT_EQ(cell.f1.stddev, 0.0);
}

TEST(RunEvaluation, UnparseableRepliesAreCounted) {
  SmallWorld w;
  ScriptBook b;
  b.add("*", {"I am not sure."});
  Gateway gw(testing::scripted(std::move(b)), no_sleep_options());
  auto run = run_evaluation(w.questions, w.corpus, gw, config());
  for (const auto& [key, cell] : run.report.cells) {
    EXPECT_EQ(cell.f1.mean, 0.0);
    EXPECT_EQ(cell.unparseable, cell.n);
  }
  EXPECT_EQ(run.trials[0].predictions[0].error, "Unparseable");
}

TEST(RunEvaluation, NoHistoryPromptsAreScanned) {
  SmallWorld w;
  auto gw = mock("always-gold");
  auto c = config();
  c.prompt.include_history = false;
  auto run = run_evaluation(w.questions, w.corpus, gw, c);
  EXPECT_EQ(run.prompts_checked, w.questions.size());
  for (const auto& b : build_prompts(w.questions, w.corpus, c.prompt)) {
    EXPECT_EQ(count_history_lines(b.text()), 0u);
  }
}

TEST(HistorySweep, WindowZeroEqualsNoHistory) {
  SmallWorld w;
  auto sweep_gw = mock("uniform-random:4");
  auto points = history_sweep(w.questions, w.corpus, {0, 10, kAllHistory}, sweep_gw, config());
  ASSERT_EQ(points.size(), 3u);
  auto ablate_gw = mock("uniform-random:4");
  auto none = ablation_run(Ablation::kNoHistory, w.questions, w.corpus, ablate_gw, config());
  ASSERT_EQ(points[0].report.cells.size(), none.report.cells.size());
  for (const auto& [key, cell] : none.report.cells) {
    const auto& s = points[0].report.cells.at(key);
    EXPECT_EQ(s.f1.mean, cell.f1.mean);
    EXPECT_EQ(s.accuracy.mean, cell.accuracy.mean);
  }
  EXPECT_EQ(window_label(kAllHistory), "all");
  EXPECT_EQ(window_label(20), "20");
}

TEST(Ablation, NamesAndPreconditions) {
  for (auto a : {Ablation::kNone, Ablation::kNoUserinfo, Ablation::kNoInterest,
                 Ablation::kNoHistory, Ablation::kOnlyAna, Ablation::kOnlyMem}) {
    EXPECT_EQ(parse_ablation(ablation_name(a)), a);
  }
  EXPECT_EQ(code_of([] { apply_ablation(PromptConfig{}, Ablation::kOnlyMem); }),
            ErrorCode::kIncompatibleMethod);
  PromptConfig om;
  om.method = PromptMethod::kOmCot;
  EXPECT_EQ(apply_ablation(om, Ablation::kOnlyAna).tags, TagRestriction::kOnlyAna);
  EXPECT_FALSE(apply_ablation(om, Ablation::kNoUserinfo).include_userinfo);
  EXPECT_FALSE(apply_ablation(om, Ablation::kNoInterest).include_interests);
  EXPECT_FALSE(apply_ablation(om, Ablation::kNoHistory).include_history);
}

TEST(ReadAnswer, TagRestrictionStripsTheOtherSegments) {
  std::string reply = "<ANA>Seems like (A)</ANA><MEM>Earlier they picked (C)</MEM>";
  EXPECT_EQ(read_answer(reply, 4, TagRestriction::kBoth), 'C');
  EXPECT_EQ(read_answer(reply, 4, TagRestriction::kOnlyAna), 'A');
  EXPECT_EQ(read_answer(reply, 4, TagRestriction::kOnlyMem), 'C');
}

TEST(Report, JsonRoundTripAndCsv) {
  SmallWorld w;
  auto gw = mock("uniform-random:2");
  auto run = run_evaluation(w.questions, w.corpus, gw, config(2));
  auto back = EvalReport::from_json(run.report.to_json());
  EXPECT_EQ(back.to_json(), run.report.to_json());
  auto csv = report_csv(run.report);
  EXPECT_EQ(csv.rfind("platform,kind,n,f1_mean", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(run.report.cells.size()));
  auto jsonl = predictions_jsonl(run.trials);
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'),
            static_cast<long>(2 * w.questions.size()));
}

TEST(Report, SweepChart) {
  SmallWorld w(4, 12);
  auto gw = mock("always-gold");
  auto points = history_sweep(w.questions, w.corpus, {5, 10}, gw, config());
  auto svg = sweep_svg(points);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  auto csv = sweep_csv(points);
  EXPECT_EQ(csv.rfind("window,", 0), 0u);
}

TEST(Similarity, BucketsMatchDirectBinning) {
  for (double s : {-0.5, 0.0, 0.19999, 0.2, 0.5, 0.99, 1.0, 1.5}) {
    std::size_t expected = s <= 0 ? 0 : s >= 1 ? 4 : static_cast<std::size_t>(s * 5);
    EXPECT_EQ(similarity_bucket(s, 5), expected) << s;
  }
}

TEST(Similarity, SelfSimilarityAndEmptyResponses) {
  SmallWorld w(4, 12);
  std::vector<ElementQuestion> qs(w.questions.begin(), w.questions.begin() + 4);
  auto bundles = build_prompts(qs, w.corpus, PromptConfig{});
  std::vector<std::string> responses = {
      bundles[0].section(PromptSection::kBehaviorHistory), "", "", ""};
  HashingEmbedder embedder(128);
  auto rows = similarity_profile(responses, bundles, {true, false, false, true}, embedder);
  ASSERT_EQ(rows.size(), 15u);
  // history section, top bucket holds the copied response
  EXPECT_EQ(rows[4].section, "behavior_history");
  EXPECT_EQ(rows[4].n, 1u);
  EXPECT_EQ(*rows[4].mean_correct, 100.0);
  EXPECT_EQ(rows[0].n, 3u);
  EXPECT_NEAR(*rows[0].mean_correct, 100.0 / 3, 1e-12);
  for (std::size_t p = 0; p < 3; ++p) {
    std::size_t total = 0;
    for (std::size_t b = 0; b < 5; ++b) total += rows[p * 5 + b].n;
    EXPECT_EQ(total, 4u);
  }
}

TEST(Similarity, OrthogonalFixturesMatchOracle) {
  // Hand-set vectors: the response is at a known angle to each section.
  testing::TableEmbedder emb;
  SmallWorld w(4, 12);
  std::vector<ElementQuestion> qs(w.questions.begin(), w.questions.begin() + 3);
  auto bundles = build_prompts(qs, w.corpus, PromptConfig{});
  std::vector<std::string> responses = {"r0", "r1", "r2"};
  std::vector<double> angles = {0.1, 0.7, 1.4};
  for (std::size_t i = 0; i < 3; ++i) {
    emb.table[responses[i]] = {static_cast<float>(std::cos(angles[i])),
                               static_cast<float>(std::sin(angles[i]))};
    emb.table[bundles[i].section(PromptSection::kBehaviorHistory)] = {1.0f, 0.0f};
  }
  auto rows = similarity_profile(responses, bundles, {true, true, false}, emb);
  for (std::size_t i = 0; i < 3; ++i) {
    auto bucket = similarity_bucket(std::cos(angles[i]), 5);
    EXPECT_GE(rows[bucket].n, 1u) << i;
  }
  EXPECT_EQ(rows[similarity_bucket(std::cos(1.4), 5)].mean_correct, 0.0);
}

}  // namespace
}  // namespace behavesim
