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

#include "behavesim/behavesim.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/digest.h"
#include "behavesim/error.h"
#include "behavesim/evaluator.h"
#include "behavesim/ingestion.h"
#include "behavesim/llm_gateway.h"
#include "behavesim/omcot_forge.h"
#include "behavesim/prompt_engine.h"
#include "behavesim/qa_builder.h"
#include "behavesim/response_parser.h"
#include "behavesim/text_features.h"
#include "json.hpp"

using behavesim::ErrorCode;
using behavesim::fail;
using Json = nlohmann::json;

struct bsim_registry {
  behavesim::BehaviorRegistry registry;
};

struct bsim_corpus {
  std::vector<behavesim::UserTimeline> timelines;
};

struct bsim_question_set {
  std::vector<behavesim::ElementQuestion> questions;
};

struct bsim_gateway {
  std::unique_ptr<behavesim::Gateway> gateway;
};

struct bsim_report {
  struct Run {
    std::string name;
    std::optional<std::size_t> window;
    behavesim::EvalReport report;
    std::vector<behavesim::TrialResult> trials;
  };
  std::string kind;  // "eval", "sweep", "ablation" or "analyze-cot"
  std::vector<Run> runs;
  std::vector<behavesim::SimilarityRow> similarity;
};

namespace {

thread_local std::string last_error;

template <typename F>
bsim_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return BSIM_OK;
  } catch (const behavesim::Error& e) {
    last_error = e.what();
    return static_cast<bsim_status>(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return BSIM_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return BSIM_INTERNAL;
  }
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) fail(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) fail(ErrorCode::kInternal, "out of memory");
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void give(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

// Reads keys from a JSON config object and rejects keys nobody asked for.
class ConfigReader {
 public:
  explicit ConfigReader(const char* text) {
    if (!text || !*text) {
      json_ = Json::object();
      return;
    }
    try {
      json_ = Json::parse(text);
    } catch (const std::exception& e) {
      fail(ErrorCode::kInvalidArgument, std::string("config is not JSON: ") + e.what());
    }
    if (!json_.is_object()) fail(ErrorCode::kInvalidArgument, "config must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    auto it = json_.find(key);
    if (it == json_.end() || it->is_null()) return fallback;
    try {
      return it->get<T>();
    } catch (const std::exception& e) {
      fail(ErrorCode::kInvalidArgument, "config key '" + key + "': " + e.what());
    }
  }

  const Json* raw(const std::string& key) {
    used_.insert(key);
    auto it = json_.find(key);
    return it == json_.end() || it->is_null() ? nullptr : &*it;
  }

  void ignore(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : json_.items()) {
      if (!used_.count(key)) {
        fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
      }
    }
  }

 private:
  Json json_;
  std::set<std::string> used_;
};

std::size_t parse_window(const Json& v) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "all") return behavesim::kAllHistory;
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad history window '" + s + "'");
    }
  }
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::size_t>();
  fail(ErrorCode::kInvalidArgument, "history window must be a count or \"all\"");
}

behavesim::TagRestriction parse_tags(const std::string& s) {
  if (s == "both") return behavesim::TagRestriction::kBoth;
  if (s == "only-ana") return behavesim::TagRestriction::kOnlyAna;
  if (s == "only-mem") return behavesim::TagRestriction::kOnlyMem;
  fail(ErrorCode::kInvalidArgument, "tags must be both, only-ana or only-mem");
}

struct EvalSetup {
  behavesim::EvalConfig config;
  std::optional<behavesim::TemplateSet> templates;

  const behavesim::TemplateSet& template_set() const {
    return templates ? *templates : behavesim::TemplateSet::defaults();
  }
};

EvalSetup read_eval_config(ConfigReader& r) {
  EvalSetup s;
  auto& c = s.config;
  c.prompt.method = behavesim::parse_prompt_method(r.get<std::string>("method", "zero-shot"));
  if (const auto* w = r.raw("history_window")) c.prompt.history_window = parse_window(*w);
  c.prompt.include_userinfo = r.get<bool>("include_userinfo", true);
  c.prompt.include_interests = r.get<bool>("include_interests", true);
  c.prompt.include_history = r.get<bool>("include_history", true);
  c.prompt.tags = parse_tags(r.get<std::string>("tags", "both"));
  c.prompt.few_shot_examples = r.get<std::vector<std::string>>("few_shot_examples", {});
  c.prompt.bundled_few_shot = r.get<bool>("few_shot", true);
  c.trials = r.get<std::size_t>("trials", 3);
  c.model_id = r.get<std::string>("model", "default");
  c.temperature = r.get<double>("temperature", 0.1);
  c.max_output = r.get<int>("max_output", 1024);
  c.seed = r.get<std::uint64_t>("seed", 0);
  c.run_label = r.get<std::string>("run_label", "eval");
  auto dir = r.get<std::string>("templates_dir", "");
  if (!dir.empty()) s.templates = behavesim::TemplateSet::with_overrides(dir);
  return s;
}

std::shared_ptr<behavesim::Embedder> read_embedder(ConfigReader& r) {
  auto kind = r.get<std::string>("embedder", "hashing");
  auto dim = r.get<std::size_t>("embed_dim", 256);
  auto base = r.get<std::string>("embed_base_url", "");
  auto key = r.get<std::string>("embed_api_key", "");
  auto model = r.get<std::string>("embed_model", "text-embedding");
  if (kind == "hashing") return std::make_shared<behavesim::HashingEmbedder>(dim);
  if (kind == "http") {
    if (base.empty()) fail(ErrorCode::kInvalidArgument, "http embedder needs embed_base_url");
    return std::make_shared<behavesim::CachingEmbedder>(
        std::make_shared<behavesim::HttpEmbedder>(base, key, model));
  }
  fail(ErrorCode::kInvalidArgument, "embedder must be hashing or http");
}

Json similarity_json(const std::vector<behavesim::SimilarityRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"section", r.section},
                   {"bucket", r.bucket},
                   {"lower", r.lower},
                   {"upper", r.upper},
                   {"n", r.n},
                   {"mean_correct", r.mean_correct ? Json(*r.mean_correct) : Json(nullptr)}});
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bsim_report::Run make_run(std::string name, behavesim::EvalRun run,
                          std::optional<std::size_t> window = std::nullopt) {
  bsim_report::Run r;
  r.name = std::move(name);
  r.window = window;
  r.report = std::move(run.report);
  r.trials = std::move(run.trials);
  return r;
}

}  // namespace

extern "C" {

const char* bsim_version(void) { return "0.1.0"; }

const char* bsim_last_error(void) { return last_error.c_str(); }

const char* bsim_status_name(bsim_status status) {
  // error_code_name returns views of string literals.
  return behavesim::error_code_name(static_cast<ErrorCode>(status)).data();
}

void bsim_string_free(char* s) { std::free(s); }

bsim_status bsim_sha256_file(const char* path, char** hex_out) {
  return guard([&] {
    require(path, "path");
    require(hex_out, "hex_out");
    *hex_out = dup_string(behavesim::sha256_file_hex(path));
  });
}

bsim_status bsim_registry_default(bsim_registry** out) {
  return guard([&] {
    require(out, "out");
    *out = new bsim_registry{behavesim::BehaviorRegistry::default_registry()};
  });
}

bsim_status bsim_registry_load(const char* path, bsim_registry** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new bsim_registry{behavesim::BehaviorRegistry::load_file(path)};
  });
}

bsim_status bsim_registry_serialize(const bsim_registry* registry, char** tsv_out) {
  return guard([&] {
    require(registry, "registry");
    require(tsv_out, "tsv_out");
    *tsv_out = dup_string(registry->registry.serialize());
  });
}

void bsim_registry_free(bsim_registry* registry) { delete registry; }

bsim_status bsim_corpus_load(const bsim_registry* registry, const char* path,
                             const char* now, bsim_corpus** out) {
  return guard([&] {
    require(registry, "registry");
    require(path, "path");
    require(out, "out");
    auto bound = now && *now
                     ? behavesim::parse_timestamp(now)
                     : std::chrono::time_point_cast<std::chrono::seconds>(
                           std::chrono::system_clock::now());
    auto corpus = std::make_unique<bsim_corpus>();
    corpus->timelines = behavesim::load_timelines(path, registry->registry, bound);
    *out = corpus.release();
  });
}

bsim_status bsim_corpus_select(bsim_corpus* corpus, const char* policy_json,
                               char** result_json) {
  return guard([&] {
    require(corpus, "corpus");
    ConfigReader r(policy_json);
    behavesim::SelectionPolicy policy;
    policy.min_behaviors = r.get<std::size_t>("min_behaviors", policy.min_behaviors);
    policy.max_behaviors = r.get<std::size_t>("max_behaviors", policy.max_behaviors);
    policy.min_distinct_types =
        r.get<std::size_t>("min_distinct_types", policy.min_distinct_types);
    if (const auto* p = r.raw("platforms")) {
      policy.allowed_platforms.clear();
      for (const auto& name : p->get<std::vector<std::string>>()) {
        policy.allowed_platforms.insert(behavesim::parse_platform(name));
      }
    }
    r.finish();
    auto selection = behavesim::select_users(corpus->timelines, policy);
    Json result;
    result["kept"] = Json::array();
    for (const auto& t : selection.kept) {
      result["kept"].push_back({{"username", t.profile.username},
                                {"platform", std::string(behavesim::platform_name(t.profile.platform))},
                                {"behaviors", t.behaviors.size()}});
    }
    result["rejected"] = Json::array();
    for (const auto& rej : selection.rejected) {
      result["rejected"].push_back(
          {{"username", rej.username},
           {"reason", std::string(behavesim::reject_reason_name(rej.reason))}});
    }
    corpus->timelines = std::move(selection.kept);
    give(result_json, result.dump());
  });
}

bsim_status bsim_corpus_write(const bsim_corpus* corpus, const char* dir) {
  return guard([&] {
    require(corpus, "corpus");
    require(dir, "dir");
    behavesim::write_timelines(corpus->timelines, dir);
  });
}

size_t bsim_corpus_size(const bsim_corpus* corpus) {
  return corpus ? corpus->timelines.size() : 0;
}

void bsim_corpus_free(bsim_corpus* corpus) { delete corpus; }

bsim_status bsim_questions_build(const bsim_corpus* corpus, const bsim_registry* registry,
                                 const char* config_json, bsim_question_set** out,
                                 char** stats_json) {
  return guard([&] {
    require(corpus, "corpus");
    require(registry, "registry");
    require(out, "out");
    ConfigReader r(config_json);
    behavesim::QuestionSetConfig config;
    config.seed = r.get<std::uint64_t>("seed", 0);
    config.pool.window = std::chrono::days(r.get<int>("window_days", 7));
    config.pool.pool_cap = r.get<std::size_t>("pool_cap", config.pool.pool_cap);
    config.distractors.tau = r.get<double>("tau", config.distractors.tau);
    config.distractors.top_k = r.get<std::size_t>("top_k", config.distractors.top_k);
    auto embedder = read_embedder(r);
    r.finish();
    behavesim::LexiconSentiment sentiment;
    auto set = behavesim::build_questions(corpus->timelines, registry->registry, config,
                                          *embedder, sentiment);
    Json stats{{"behaviors", set.stats.behaviors},
               {"drafts", set.stats.drafts},
               {"questions", set.stats.questions},
               {"dropped_pool_too_small", set.stats.dropped_pool_too_small},
               {"refilled_questions", set.stats.refilled_questions},
               {"relaxations", set.stats.relaxations},
               {"embedder", embedder->name()}};
    *out = new bsim_question_set{std::move(set.questions)};
    give(stats_json, stats.dump());
  });
}

bsim_status bsim_questions_read(const char* path, bsim_question_set** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new bsim_question_set{behavesim::read_questions(path)};
  });
}

bsim_status bsim_questions_write(const bsim_question_set* questions, const char* path) {
  return guard([&] {
    require(questions, "questions");
    require(path, "path");
    behavesim::write_questions(questions->questions, path);
  });
}

bsim_status bsim_questions_split(const bsim_question_set* questions, double train_ratio,
                                 uint64_t seed, bsim_question_set** train,
                                 bsim_question_set** test, char** info_json) {
  return guard([&] {
    require(questions, "questions");
    require(train, "train");
    require(test, "test");
    auto split = behavesim::split_dataset(questions->questions, train_ratio, seed);
    Json info{{"train_users", split.train_users},
              {"test_users", split.test_users},
              {"train_questions", split.train.size()},
              {"test_questions", split.test.size()},
              {"requested_ratio", split.requested_ratio},
              {"train_fraction", split.train_fraction},
              {"warning", split.warning ? Json(*split.warning) : Json(nullptr)}};
    auto tr = std::make_unique<bsim_question_set>(bsim_question_set{std::move(split.train)});
    auto te = std::make_unique<bsim_question_set>(bsim_question_set{std::move(split.test)});
    give(info_json, info.dump());
    *train = tr.release();
    *test = te.release();
  });
}

size_t bsim_questions_size(const bsim_question_set* questions) {
  return questions ? questions->questions.size() : 0;
}

bsim_status bsim_questions_get(const bsim_question_set* questions, size_t index,
                               char** json_out) {
  return guard([&] {
    require(questions, "questions");
    require(json_out, "json_out");
    if (index >= questions->questions.size()) {
      fail(ErrorCode::kOutOfRange, "question index " + std::to_string(index));
    }
    *json_out = dup_string(behavesim::serialize_question(questions->questions[index]));
  });
}

void bsim_questions_free(bsim_question_set* questions) { delete questions; }

bsim_status bsim_gateway_create(const char* config_json, bsim_gateway** out) {
  return guard([&] {
    require(out, "out");
    ConfigReader r(config_json);
    auto backend_spec = r.get<std::string>("backend", "mock:always-gold");
    auto base_url = r.get<std::string>("base_url", "");
    auto api_key = r.get<std::string>("api_key", "");
    behavesim::GatewayOptions options;
    options.concurrency = r.get<std::size_t>("concurrency", options.concurrency);
    options.requests_per_minute = r.get<double>("requests_per_minute", 0.0);
    options.retry.max_attempts = r.get<int>("max_attempts", options.retry.max_attempts);
    options.retry.base_delay = std::chrono::milliseconds(
        r.get<std::int64_t>("base_delay_ms", options.retry.base_delay.count()));
    options.retry.max_delay = std::chrono::milliseconds(
        r.get<std::int64_t>("max_delay_ms", options.retry.max_delay.count()));
    options.jitter_seed = r.get<std::uint64_t>("jitter_seed", 0);
    auto cache_dir = r.get<std::string>("cache_dir", "");
    r.finish();
    auto backend = behavesim::make_backend(backend_spec, base_url, api_key);
    if (!cache_dir.empty()) {
      backend = std::make_shared<behavesim::CachingBackend>(std::move(backend), cache_dir);
    }
    *out = new bsim_gateway{std::make_unique<behavesim::Gateway>(std::move(backend), options)};
  });
}

bsim_status bsim_gateway_usage(const bsim_gateway* gateway, char** usage_json) {
  return guard([&] {
    require(gateway, "gateway");
    require(usage_json, "usage_json");
    auto u = gateway->gateway->usage();
    Json j{{"backend", gateway->gateway->backend_name()},
           {"issued", u.issued},
           {"answered", u.answered},
           {"failed", u.failed},
           {"attempts", u.attempts},
           {"max_in_flight", u.max_in_flight},
           {"errors", u.errors}};
    *usage_json = dup_string(j.dump());
  });
}

void bsim_gateway_free(bsim_gateway* gateway) { delete gateway; }

bsim_status bsim_evaluate(const bsim_question_set* questions, const bsim_corpus* corpus,
                          bsim_gateway* gateway, const char* config_json,
                          bsim_report** out) {
  return guard([&] {
    require(questions, "questions");
    require(corpus, "corpus");
    require(gateway, "gateway");
    require(out, "out");
    ConfigReader r(config_json);
    auto setup = read_eval_config(r);
    r.finish();
    auto report = std::make_unique<bsim_report>();
    report->kind = "eval";
    report->runs.push_back(make_run(
        "main", behavesim::run_evaluation(questions->questions, corpus->timelines,
                                          *gateway->gateway, setup.config,
                                          setup.template_set())));
    *out = report.release();
  });
}

bsim_status bsim_sweep(const bsim_question_set* questions, const bsim_corpus* corpus,
                       bsim_gateway* gateway, const char* config_json, bsim_report** out) {
  return guard([&] {
    require(questions, "questions");
    require(corpus, "corpus");
    require(gateway, "gateway");
    require(out, "out");
    ConfigReader r(config_json);
    std::vector<std::size_t> windows = behavesim::kDefaultSweepWindows;
    if (const auto* w = r.raw("windows")) {
      if (!w->is_array()) fail(ErrorCode::kInvalidArgument, "windows must be a list");
      windows.clear();
      for (const auto& v : *w) windows.push_back(parse_window(v));
    }
    auto setup = read_eval_config(r);
    r.finish();
    if (windows.empty()) fail(ErrorCode::kInvalidArgument, "no history windows");
    auto report = std::make_unique<bsim_report>();
    report->kind = "sweep";
    for (auto w : windows) {
      auto c = setup.config;
      c.prompt.history_window = w;
      c.run_label = setup.config.run_label + ":w" + behavesim::window_label(w);
      report->runs.push_back(make_run(
          "window-" + behavesim::window_label(w),
          behavesim::run_evaluation(questions->questions, corpus->timelines,
                                    *gateway->gateway, c, setup.template_set()),
          w));
    }
    *out = report.release();
  });
}

bsim_status bsim_ablate(const bsim_question_set* questions, const bsim_corpus* corpus,
                        bsim_gateway* gateway, const char* config_json, bsim_report** out) {
  return guard([&] {
    require(questions, "questions");
    require(corpus, "corpus");
    require(gateway, "gateway");
    require(out, "out");
    ConfigReader r(config_json);
    auto names = r.get<std::vector<std::string>>(
        "ablations", {"none", "no-userinfo", "no-interest", "no-history"});
    auto setup = read_eval_config(r);
    r.finish();
    if (names.empty()) fail(ErrorCode::kInvalidArgument, "no ablations requested");
    std::vector<behavesim::Ablation> ablations;
    for (const auto& n : names) {
      ablations.push_back(behavesim::parse_ablation(n));
      behavesim::apply_ablation(setup.config.prompt, ablations.back());
    }
    auto report = std::make_unique<bsim_report>();
    report->kind = "ablation";
    for (auto a : ablations) {
      report->runs.push_back(make_run(
          std::string(behavesim::ablation_name(a)),
          behavesim::ablation_run(a, questions->questions, corpus->timelines,
                                  *gateway->gateway, setup.config, setup.template_set())));
    }
    *out = report.release();
  });
}

bsim_status bsim_analyze_cot(const bsim_question_set* questions, const bsim_corpus* corpus,
                             bsim_gateway* gateway, const char* config_json,
                             bsim_report** out) {
  return guard([&] {
    require(questions, "questions");
    require(corpus, "corpus");
    require(gateway, "gateway");
    require(out, "out");
    ConfigReader r(config_json);
    auto buckets = r.get<std::size_t>("buckets", 5);
    auto embedder = read_embedder(r);
    auto setup = read_eval_config(r);
    r.finish();
    auto run = behavesim::run_evaluation(questions->questions, corpus->timelines,
                                         *gateway->gateway, setup.config,
                                         setup.template_set());
    auto bundles = behavesim::build_prompts(questions->questions, corpus->timelines,
                                            setup.config.prompt, setup.template_set());
    const auto& first = run.trials.front().predictions;
    std::vector<std::string> responses;
    std::vector<bool> correct;
    for (const auto& p : first) {
      // Score the reasoning only; the decision sentence is the same for all.
      std::string text = p.raw_text;
      if (auto d = behavesim::find_decision_sentence(text)) text.erase(d->begin);
      responses.push_back(std::move(text));
      correct.push_back(p.letter && *p.letter == p.gold_letter);
    }
    auto report = std::make_unique<bsim_report>();
    report->kind = "analyze-cot";
    report->similarity =
        behavesim::similarity_profile(responses, bundles, correct, *embedder, buckets);
    report->runs.push_back(make_run("main", std::move(run)));
    *out = report.release();
  });
}

bsim_status bsim_report_load(const char* path, bsim_report** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    Json j;
    try {
      j = Json::parse(read_file(path));
    } catch (const behavesim::Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::kMalformedLine, std::string(path) + ": " + e.what());
    }
    auto report = std::make_unique<bsim_report>();
    try {
      report->kind = j.at("kind").get<std::string>();
      for (const auto& run : j.at("runs")) {
        bsim_report::Run r;
        r.name = run.at("name").get<std::string>();
        if (run.contains("window")) r.window = parse_window(run.at("window"));
        r.report = behavesim::EvalReport::from_json(run.at("report").dump());
        report->runs.push_back(std::move(r));
      }
      for (const auto& row : j.value("similarity", Json::array())) {
        behavesim::SimilarityRow s;
        s.section = row.at("section").get<std::string>();
        s.bucket = row.at("bucket").get<std::size_t>();
        s.lower = row.at("lower").get<double>();
        s.upper = row.at("upper").get<double>();
        s.n = row.at("n").get<std::size_t>();
        if (!row.at("mean_correct").is_null()) s.mean_correct = row.at("mean_correct").get<double>();
        report->similarity.push_back(std::move(s));
      }
    } catch (const behavesim::Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::kMalformedLine, std::string(path) + ": " + e.what());
    }
    *out = report.release();
  });
}

bsim_status bsim_report_json(const bsim_report* report, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    Json j;
    j["kind"] = report->kind;
    j["runs"] = Json::array();
    for (const auto& r : report->runs) {
      Json run{{"name", r.name}, {"report", Json::parse(r.report.to_json())}};
      if (r.window) run["window"] = behavesim::window_label(*r.window);
      j["runs"].push_back(std::move(run));
    }
    if (!report->similarity.empty()) j["similarity"] = similarity_json(report->similarity);
    *out = dup_string(j.dump(2) + "\n");
  });
}

bsim_status bsim_report_csv(const bsim_report* report, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    if (report->runs.empty()) fail(ErrorCode::kInvalidArgument, "report has no runs");
    std::string csv;
    if (report->kind == "sweep") {
      std::vector<behavesim::SweepPoint> points;
      for (const auto& r : report->runs) points.push_back({r.window.value_or(0), r.report});
      csv = behavesim::sweep_csv(points);
    } else if (report->kind == "ablation") {
      std::vector<std::pair<std::string, behavesim::EvalReport>> rows;
      for (const auto& r : report->runs) rows.emplace_back(r.name, r.report);
      csv = behavesim::ablation_csv(rows);
    } else if (report->kind == "analyze-cot") {
      csv = behavesim::similarity_csv(report->similarity);
    } else {
      csv = behavesim::report_csv(report->runs.front().report);
    }
    *out = dup_string(csv);
  });
}

bsim_status bsim_report_svg(const bsim_report* report, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    if (report->kind != "sweep") {
      fail(ErrorCode::kInvalidArgument, "only sweep reports have a chart");
    }
    std::vector<behavesim::SweepPoint> points;
    for (const auto& r : report->runs) points.push_back({r.window.value_or(0), r.report});
    *out = dup_string(behavesim::sweep_svg(points));
  });
}

bsim_status bsim_report_predictions(const bsim_report* report, char** out) {
  return guard([&] {
    require(report, "report");
    require(out, "out");
    std::string text;
    if (report->runs.size() == 1) {
      text = behavesim::predictions_jsonl(report->runs.front().trials);
    } else {
      // Tag lines with their run.
      for (const auto& r : report->runs) {
        std::istringstream lines(behavesim::predictions_jsonl(r.trials));
        std::string line;
        while (std::getline(lines, line)) {
          auto j = Json::parse(line);
          j["run"] = r.name;
          text += j.dump() + "\n";
        }
      }
    }
    *out = dup_string(text);
  });
}

bsim_status bsim_report_cell(const bsim_report* report, const char* platform,
                             const char* kind, double* f1_mean, double* accuracy_mean) {
  return guard([&] {
    require(report, "report");
    require(platform, "platform");
    require(kind, "kind");
    if (report->runs.empty()) fail(ErrorCode::kOutOfRange, "report has no runs");
    const auto& cells = report->runs.front().report.cells;
    auto it = cells.find({behavesim::parse_platform(platform),
                          behavesim::parse_element_kind(kind)});
    if (it == cells.end()) {
      fail(ErrorCode::kOutOfRange, std::string("no cell ") + platform + "/" + kind);
    }
    if (f1_mean) *f1_mean = it->second.f1.mean;
    if (accuracy_mean) *accuracy_mean = it->second.accuracy.mean;
  });
}

void bsim_report_free(bsim_report* report) { delete report; }

bsim_status bsim_forge(const bsim_question_set* questions, const bsim_corpus* corpus,
                       bsim_gateway* gateway, const char* config_json,
                       const char* out_path, const char* reject_log,
                       char** manifest_json) {
  return guard([&] {
    require(questions, "questions");
    require(corpus, "corpus");
    require(gateway, "gateway");
    require(out_path, "out_path");
    ConfigReader r(config_json);
    behavesim::ForgeConfig c;
    c.oracle_model = r.get<std::string>("oracle_model", c.oracle_model);
    c.reorg_model = r.get<std::string>("reorg_model", c.reorg_model);
    c.oracle_attempts = r.get<int>("oracle_attempts", c.oracle_attempts);
    c.reorganize_attempts = r.get<int>("reorganize_attempts", c.reorganize_attempts);
    c.ngram = r.get<std::size_t>("ngram", c.ngram);
    c.max_overlap = r.get<double>("max_overlap", c.max_overlap);
    if (const auto* w = r.raw("history_window")) c.history_window = parse_window(*w);
    c.temperature = r.get<double>("temperature", c.temperature);
    c.max_records = r.get<std::size_t>("max_records", c.max_records);
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    c.run_label = r.get<std::string>("run_label", c.run_label);
    auto dir = r.get<std::string>("templates_dir", "");
    r.finish();
    std::optional<behavesim::TemplateSet> templates;
    if (!dir.empty()) templates = behavesim::TemplateSet::with_overrides(dir);
    auto result = behavesim::run_forge(
        questions->questions, corpus->timelines, *gateway->gateway, c,
        templates ? *templates : behavesim::TemplateSet::defaults());
    behavesim::emit_sft_records(result.records, result.manifest, out_path);
    if (reject_log && *reject_log) behavesim::write_reject_log(result.rejects, reject_log);
    give(manifest_json, result.manifest.to_json());
  });
}

bsim_status bsim_extract_answer(const char* text, size_t n_options, char* letter_out) {
  return guard([&] {
    require(text, "text");
    require(letter_out, "letter_out");
    *letter_out = behavesim::extract_answer(text, n_options);
  });
}

bsim_status bsim_parse_segments(const char* text, char** json_out) {
  return guard([&] {
    require(text, "text");
    require(json_out, "json_out");
    auto cot = behavesim::parse_segments(text);
    Json j;
    j["segments"] = Json::array();
    for (const auto& s : cot.segments) {
      j["segments"].push_back(
          {{"tag", std::string(behavesim::segment_tag_name(s.tag))}, {"text", s.text}});
    }
    j["decision"] = cot.decision_sentence;
    j["letter"] = std::string(1, cot.decided_letter);
    *json_out = dup_string(j.dump());
  });
}

bsim_status bsim_detect_leakage(const char* cot_text, const char* gold_text,
                                char gold_letter, size_t ngram, double max_overlap,
                                char** json_out) {
  return guard([&] {
    require(cot_text, "cot_text");
    require(gold_text, "gold_text");
    require(json_out, "json_out");
    auto report = behavesim::detect_leakage(cot_text, gold_text, gold_letter, ngram,
                                            max_overlap);
    Json j{{"leaked", report.leaked},
           {"trigger", std::string(behavesim::leak_trigger_name(report.trigger))},
           {"overlap_fraction", report.overlap_fraction}};
    *json_out = dup_string(j.dump());
  });
}

}  // extern "C"
