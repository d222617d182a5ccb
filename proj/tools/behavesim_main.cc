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

// Command-line front end. Every stage reads and writes files only, and every
// subcommand leaves a manifest next to its main output holding the resolved
// settings and the SHA-256 of each input and output.
//
// Settings are layered: built-in defaults, then --config FILE (key = value
// lines), then BEHAVESIM_API_BASE / BEHAVESIM_API_KEY / BEHAVESIM_CACHE_DIR,
// then flags.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "behavesim/behavesim.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using RunConfig = std::map<std::string, std::string>;

// Raised for domain failures; carries the library status name.
struct Failure {
  std::string code;
  std::string message;
  bool usage = false;  // bad flags or settings: exit 2 rather than 1
};

void check(bsim_status status) {
  if (status != BSIM_OK) throw Failure{bsim_status_name(status), bsim_last_error()};
}

[[noreturn]] void usage_failure(const std::string& message) {
  throw Failure{"InvalidArgument", message, true};
}

// Owns a string allocated by the library.
class LibString {
 public:
  LibString() = default;
  ~LibString() { bsim_string_free(ptr_); }
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  char** out() { return &ptr_; }
  std::string str() const { return ptr_ ? ptr_ : ""; }

 private:
  char* ptr_ = nullptr;
};

template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(ptr_); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Registry = Handle<bsim_registry, bsim_registry_free>;
using Corpus = Handle<bsim_corpus, bsim_corpus_free>;
using Questions = Handle<bsim_question_set, bsim_questions_free>;
using GatewayHandle = Handle<bsim_gateway, bsim_gateway_free>;
using Report = Handle<bsim_report, bsim_report_free>;

const RunConfig& defaults() {
  static const RunConfig kDefaults = {
      {"seed", "0"},
      {"timelines", ""},
      {"questions", ""},
      {"out", ""},
      {"inputs", ""},
      {"registry", ""},
      {"now", ""},
      {"min_behaviors", "70"},
      {"max_behaviors", "1000"},
      {"min_distinct_types", "2"},
      {"ratio", "0.78"},
      {"split", "false"},
      {"window_days", "7"},
      {"pool_cap", "200"},
      {"tau", "0.3"},
      {"topk", "20"},
      {"embedder", "hashing"},
      {"embed_model", "text-embedding"},
      {"history_window", "30"},
      {"method", "zero-shot"},
      {"trials", "3"},
      {"backend", "mock:always-gold"},
      {"model", "default"},
      {"temperature", "0.1"},
      {"max_output", "1024"},
      {"concurrency", "4"},
      {"rpm", ""},
      {"max_attempts", "5"},
      {"base_url", ""},
      {"api_key", ""},
      {"cache_dir", ""},
      {"templates_dir", ""},
      {"ablation", "none,no-userinfo,no-interest,no-history"},
      {"windows", "10,20,30,40,50,all"},
      {"buckets", "5"},
      {"oracle_model", "oracle"},
      {"reorg_model", "reorganizer"},
      {"max_records", "0"},
      {"reject_log", ""},
  };
  return kDefaults;
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "key = value" lines; '#' starts a comment line.
void merge_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{"IoError", "cannot open config file " + path};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      usage_failure(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (!defaults().count(key)) {
      usage_failure(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    config[key] = trim(line.substr(eq + 1));
  }
}

void merge_env(RunConfig& config) {
  static const std::pair<const char*, const char*> kEnv[] = {
      {"BEHAVESIM_API_BASE", "base_url"},
      {"BEHAVESIM_API_KEY", "api_key"},
      {"BEHAVESIM_CACHE_DIR", "cache_dir"},
  };
  for (const auto& [var, key] : kEnv) {
    if (const char* v = std::getenv(var); v && *v) config[key] = v;
  }
}

const std::string& need(const RunConfig& c, const std::string& key) {
  const auto& v = c.at(key);
  if (v.empty()) usage_failure("--" + key + " is required");
  return v;
}

Json number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (v.find_first_of(".eE") != std::string::npos) {
      double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } else {
      long long n = std::stoll(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  usage_failure("--" + key + " expects a number, got '" + v + "'");
}

Json u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used == v.size() && v[0] != '-') return n;
  } catch (const std::exception&) {
  }
  usage_failure("--" + key + " expects a non-negative integer, got '" + v + "'");
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no" || v.empty()) return false;
  usage_failure("--" + key + " expects true or false");
}

Json window_value(const std::string& v) {
  if (v == "all") return v;
  return u64("history-window", v);
}

// ---- manifests ----

struct Manifest {
  std::string subcommand;
  RunConfig config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json result = Json::object();
};

std::string sha256(const std::string& path) {
  LibString hex;
  check(bsim_sha256_file(path.c_str(), hex.out()));
  return hex.str();
}

Json digests(const std::vector<std::string>& paths) {
  Json out = Json::array();
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") {
          files.push_back(e.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back({{"path", f}, {"sha256", sha256(f)}});
    } else {
      out.push_back({{"path", p}, {"sha256", sha256(p)}});
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{"IoError", "cannot write " + path};
  out << text;
  if (!out) throw Failure{"IoError", "write failed for " + path};
}

std::string manifest_path_for(const std::string& out) {
  if (fs::is_directory(out)) return (fs::path(out) / "manifest.json").string();
  return out + ".manifest.json";
}

void write_manifest(const Manifest& m, const std::string& path) {
  Json config = Json::object();
  for (const auto& [k, v] : m.config) config[k] = k == "api_key" && !v.empty() ? "<redacted>" : v;
  Json j;
  j["tool"] = "behavesim";
  j["version"] = bsim_version();
  j["subcommand"] = m.subcommand;
  j["config"] = config;
  j["inputs"] = digests(m.inputs);
  j["outputs"] = digests(m.outputs);
  j["result"] = m.result;
  write_text(path, j.dump(2) + "\n");
}

// ---- shared setup ----

void load_registry(const RunConfig& c, Registry& registry) {
  if (c.at("registry").empty()) {
    check(bsim_registry_default(registry.out()));
  } else {
    check(bsim_registry_load(c.at("registry").c_str(), registry.out()));
  }
}

void load_corpus(const RunConfig& c, const Registry& registry, Corpus& corpus) {
  const auto& now = c.at("now");
  check(bsim_corpus_load(registry.get(), need(c, "timelines").c_str(),
                         now.empty() ? nullptr : now.c_str(), corpus.out()));
}

std::string policy_json(const RunConfig& c) {
  return Json{{"min_behaviors", u64("min_behaviors", c.at("min_behaviors"))},
              {"max_behaviors", u64("max_behaviors", c.at("max_behaviors"))},
              {"min_distinct_types", u64("min_distinct_types", c.at("min_distinct_types"))}}
      .dump();
}

void make_gateway(const RunConfig& c, GatewayHandle& gateway) {
  const auto& backend = c.at("backend");
  Json j{{"backend", backend},
         {"concurrency", u64("concurrency", c.at("concurrency"))},
         {"max_attempts", number("max_attempts", c.at("max_attempts"))},
         {"jitter_seed", u64("seed", c.at("seed"))}};
  const bool http = backend == "http";
  j["requests_per_minute"] =
      c.at("rpm").empty() ? Json(http ? 60.0 : 0.0) : number("rpm", c.at("rpm"));
  if (http) {
    j["base_url"] = c.at("base_url");
    j["api_key"] = c.at("api_key");
  }
  if (!c.at("cache_dir").empty()) j["cache_dir"] = c.at("cache_dir");
  check(bsim_gateway_create(j.dump().c_str(), gateway.out()));
}

Json eval_json(const RunConfig& c, const std::string& label) {
  Json j{{"method", c.at("method")},
         {"history_window", window_value(c.at("history_window"))},
         {"trials", u64("trials", c.at("trials"))},
         {"model", c.at("model")},
         {"temperature", number("temperature", c.at("temperature"))},
         {"max_output", number("max_output", c.at("max_output"))},
         {"seed", u64("seed", c.at("seed"))},
         {"run_label", label}};
  if (!c.at("templates_dir").empty()) j["templates_dir"] = c.at("templates_dir");
  return j;
}

Json embedder_json(const RunConfig& c) {
  Json j{{"embedder", c.at("embedder")}};
  if (c.at("embedder") == "http") {
    j["embed_base_url"] = c.at("base_url");
    j["embed_api_key"] = c.at("api_key");
    j["embed_model"] = c.at("embed_model");
  }
  return j;
}

Json usage_of(const GatewayHandle& gateway) {
  LibString usage;
  check(bsim_gateway_usage(gateway.get(), usage.out()));
  return Json::parse(usage.str());
}

std::string with_suffix(const std::string& path, const std::string& from,
                        const std::string& to) {
  if (path.size() >= from.size() && path.compare(path.size() - from.size(), from.size(), from) == 0) {
    return path.substr(0, path.size() - from.size()) + to;
  }
  return path + to;
}

// Writes report JSON, CSV, predictions and (for sweeps) the chart.
std::vector<std::string> save_report(const Report& report, const std::string& out,
                                     bool chart) {
  std::vector<std::string> written;
  LibString json, csv, predictions;
  check(bsim_report_json(report.get(), json.out()));
  check(bsim_report_csv(report.get(), csv.out()));
  check(bsim_report_predictions(report.get(), predictions.out()));
  write_text(out, json.str());
  written.push_back(out);
  auto csv_path = with_suffix(out, ".json", ".csv");
  write_text(csv_path, csv.str());
  written.push_back(csv_path);
  auto pred_path = with_suffix(out, ".json", ".predictions.jsonl");
  write_text(pred_path, predictions.str());
  written.push_back(pred_path);
  if (chart) {
    LibString svg;
    check(bsim_report_svg(report.get(), svg.out()));
    auto svg_path = with_suffix(out, ".json", ".svg");
    write_text(svg_path, svg.str());
    written.push_back(svg_path);
  }
  return written;
}

// ---- subcommands ----

void cmd_ingest(const RunConfig& c) {
  Registry registry;
  Corpus corpus;
  load_registry(c, registry);
  load_corpus(c, registry, corpus);
  LibString selection;
  check(bsim_corpus_select(corpus.get(), policy_json(c).c_str(), selection.out()));
  const auto& out = need(c, "out");
  fs::create_directories(out);
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() == ".jsonl") fs::remove(e.path());
  }
  check(bsim_corpus_write(corpus.get(), out.c_str()));
  Manifest m{"ingest", c, {c.at("timelines")}, {out}};
  m.result = Json::parse(selection.str());
  write_manifest(m, manifest_path_for(out));
  std::cout << "kept " << m.result["kept"].size() << " users, rejected "
            << m.result["rejected"].size() << "; wrote " << out << "\n";
}

void cmd_build_qa(const RunConfig& c) {
  Registry registry;
  Corpus corpus;
  load_registry(c, registry);
  load_corpus(c, registry, corpus);
  Json config = embedder_json(c);
  config["seed"] = u64("seed", c.at("seed"));
  config["window_days"] = number("window_days", c.at("window_days"));
  config["pool_cap"] = u64("pool_cap", c.at("pool_cap"));
  config["tau"] = number("tau", c.at("tau"));
  config["top_k"] = u64("topk", c.at("topk"));
  Questions questions;
  LibString stats;
  check(bsim_questions_build(corpus.get(), registry.get(), config.dump().c_str(),
                             questions.out(), stats.out()));
  const auto& out = need(c, "out");
  write_text(out, "");
  check(bsim_questions_write(questions.get(), out.c_str()));
  Manifest m{"build-qa", c, {c.at("timelines")}, {out}};
  m.result["stats"] = Json::parse(stats.str());
  if (boolean("split", c.at("split"))) {
    Questions train, test;
    LibString info;
    check(bsim_questions_split(questions.get(), number("ratio", c.at("ratio")).get<double>(),
                               u64("seed", c.at("seed")).get<std::uint64_t>(), train.out(),
                               test.out(), info.out()));
    auto train_path = with_suffix(out, ".jsonl", ".train.jsonl");
    auto test_path = with_suffix(out, ".jsonl", ".test.jsonl");
    check(bsim_questions_write(train.get(), train_path.c_str()));
    check(bsim_questions_write(test.get(), test_path.c_str()));
    m.outputs.push_back(train_path);
    m.outputs.push_back(test_path);
    m.result["split"] = Json::parse(info.str());
    if (!m.result["split"]["warning"].is_null()) {
      std::cerr << "warning: " << m.result["split"]["warning"].get<std::string>() << "\n";
    }
  }
  write_manifest(m, manifest_path_for(out));
  std::cout << "wrote " << bsim_questions_size(questions.get()) << " questions to " << out << "\n";
}

struct EvalInputs {
  Registry registry;
  Corpus corpus;
  Questions questions;
  GatewayHandle gateway;
};

void load_eval_inputs(const RunConfig& c, EvalInputs& in) {
  load_registry(c, in.registry);
  load_corpus(c, in.registry, in.corpus);
  check(bsim_questions_read(need(c, "questions").c_str(), in.questions.out()));
  make_gateway(c, in.gateway);
}

void finish_eval(const std::string& name, const RunConfig& c, EvalInputs& in,
                 const Report& report, bool chart) {
  const auto& out = need(c, "out");
  Manifest m{name, c, {c.at("timelines"), c.at("questions")}, save_report(report, out, chart)};
  m.result["gateway"] = usage_of(in.gateway);
  write_manifest(m, manifest_path_for(out));
  LibString csv;
  check(bsim_report_csv(report.get(), csv.out()));
  std::cout << csv.str();
}

void cmd_run_eval(const RunConfig& c) {
  EvalInputs in;
  load_eval_inputs(c, in);
  Report report;
  check(bsim_evaluate(in.questions.get(), in.corpus.get(), in.gateway.get(),
                      eval_json(c, "eval").dump().c_str(), report.out()));
  finish_eval("run-eval", c, in, report, false);
}

void cmd_ablate(const RunConfig& c) {
  EvalInputs in;
  load_eval_inputs(c, in);
  auto config = eval_json(c, "ablate");
  config["ablations"] = split_list(c.at("ablation"));
  Report report;
  check(bsim_ablate(in.questions.get(), in.corpus.get(), in.gateway.get(),
                    config.dump().c_str(), report.out()));
  finish_eval("ablate", c, in, report, false);
}

void cmd_sweep(const RunConfig& c) {
  EvalInputs in;
  load_eval_inputs(c, in);
  auto config = eval_json(c, "sweep");
  Json windows = Json::array();
  for (const auto& w : split_list(c.at("windows"))) windows.push_back(window_value(w));
  config["windows"] = windows;
  Report report;
  check(bsim_sweep(in.questions.get(), in.corpus.get(), in.gateway.get(),
                   config.dump().c_str(), report.out()));
  finish_eval("sweep", c, in, report, true);
}

void cmd_analyze_cot(const RunConfig& c) {
  EvalInputs in;
  load_eval_inputs(c, in);
  auto config = eval_json(c, "analyze");
  config.update(embedder_json(c));
  config["buckets"] = u64("buckets", c.at("buckets"));
  Report report;
  check(bsim_analyze_cot(in.questions.get(), in.corpus.get(), in.gateway.get(),
                         config.dump().c_str(), report.out()));
  finish_eval("analyze-cot", c, in, report, false);
}

void cmd_gen_omcot(const RunConfig& c) {
  EvalInputs in;
  load_eval_inputs(c, in);
  Json config{{"oracle_model", c.at("oracle_model")},
              {"reorg_model", c.at("reorg_model")},
              {"history_window", window_value(c.at("history_window"))},
              {"temperature", number("temperature", c.at("temperature"))},
              {"max_records", u64("max_records", c.at("max_records"))},
              {"seed", u64("seed", c.at("seed"))}};
  if (!c.at("templates_dir").empty()) config["templates_dir"] = c.at("templates_dir");
  const auto& out = need(c, "out");
  if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  const auto& reject_log = c.at("reject_log");
  LibString manifest;
  check(bsim_forge(in.questions.get(), in.corpus.get(), in.gateway.get(), config.dump().c_str(),
                   out.c_str(), reject_log.empty() ? nullptr : reject_log.c_str(),
                   manifest.out()));
  Manifest m{"gen-omcot", c, {c.at("timelines"), c.at("questions")}, {out}};
  if (!reject_log.empty()) m.outputs.push_back(reject_log);
  m.result = Json::parse(manifest.str());
  m.result["gateway"] = usage_of(in.gateway);
  write_manifest(m, manifest_path_for(out));
  std::cout << "emitted " << m.result["emitted"] << " records, rejected "
            << m.result["rejects"] << "; wrote " << out << "\n";
}

void cmd_report(const RunConfig& c) {
  auto inputs = split_list(need(c, "inputs"));
  const auto& out = need(c, "out");
  fs::create_directories(out);
  Manifest m{"report", c, inputs, {}};
  for (const auto& path : inputs) {
    Report report;
    check(bsim_report_load(path.c_str(), report.out()));
    auto stem = fs::path(path).stem().string();
    LibString csv;
    check(bsim_report_csv(report.get(), csv.out()));
    auto csv_path = (fs::path(out) / (stem + ".csv")).string();
    write_text(csv_path, csv.str());
    m.outputs.push_back(csv_path);
    LibString svg;
    if (bsim_report_svg(report.get(), svg.out()) == BSIM_OK) {
      auto svg_path = (fs::path(out) / (stem + ".svg")).string();
      write_text(svg_path, svg.str());
      m.outputs.push_back(svg_path);
    }
  }
  write_manifest(m, manifest_path_for(out));
  for (const auto& o : m.outputs) std::cout << o << "\n";
}

using Runner = void (*)(const RunConfig&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> kRunners = {
      {"ingest", cmd_ingest},       {"build-qa", cmd_build_qa},
      {"run-eval", cmd_run_eval},   {"gen-omcot", cmd_gen_omcot},
      {"ablate", cmd_ablate},       {"sweep", cmd_sweep},
      {"analyze-cot", cmd_analyze_cot}, {"report", cmd_report},
  };
  return kRunners;
}

void replay(const std::string& manifest_path, const std::string& out_override) {
  std::ifstream in(manifest_path);
  if (!in) throw Failure{"IoError", "cannot open " + manifest_path};
  Json m;
  try {
    m = Json::parse(in);
  } catch (const std::exception& e) {
    throw Failure{"MalformedLine", manifest_path + ": " + e.what()};
  }
  auto sub = m.value("subcommand", "");
  auto it = runners().find(sub);
  if (it == runners().end()) usage_failure("manifest names unknown subcommand '" + sub + "'");
  RunConfig config = defaults();
  for (const auto& [k, v] : m.at("config").items()) {
    if (!config.count(k)) usage_failure("manifest has unknown key '" + k + "'");
    config[k] = v.get<std::string>();
  }
  if (config["api_key"] == "<redacted>") config["api_key"] = "";
  merge_env(config);
  if (!out_override.empty()) config["out"] = out_override;
  it->second(config);
}

const char* describe(const std::string& name) {
  static const std::map<std::string, const char*> kHelp = {
      {"ingest", "validate timelines, select users, write a clean corpus"},
      {"build-qa", "build multiple-choice questions (optionally split them)"},
      {"run-eval", "score a model on a question set"},
      {"gen-omcot", "forge tagged-reasoning instruction data"},
      {"ablate", "evaluate with prompt sections or reasoning tags removed"},
      {"sweep", "evaluate across history window sizes"},
      {"analyze-cot", "relate reasoning similarity to correctness"},
      {"report", "render CSV and charts from saved reports"},
  };
  return kHelp.at(name);
}

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kFlags[] = {
    {"--timelines", "timelines", "timeline file or directory"},
    {"--questions", "questions", "question file (line-delimited JSON)"},
    {"--out", "out", "output path"},
    {"--inputs", "inputs", "comma-separated report files"},
    {"--seed", "seed", "global seed"},
    {"--registry", "registry", "behavior registry TSV"},
    {"--now", "now", "latest valid timestamp"},
    {"--min-behaviors", "min_behaviors", "selection lower bound"},
    {"--max-behaviors", "max_behaviors", "selection upper bound"},
    {"--ratio", "ratio", "train fraction for --split"},
    {"--window-days", "window_days", "candidate time window in days"},
    {"--pool-cap", "pool_cap", "candidate pool cap"},
    {"--tau", "tau", "distractor sentiment gap"},
    {"--topk", "topk", "distractor similarity top-K"},
    {"--embedder", "embedder", "hashing or http"},
    {"--embed-model", "embed_model", "embedding model id"},
    {"--history-window", "history_window", "history lines in prompts, or all"},
    {"--method", "method", "zero-shot, few-shot, std-cot, om-cot"},
    {"--trials", "trials", "trials per question"},
    {"--ablation", "ablation", "comma-separated ablations"},
    {"--windows", "windows", "comma-separated sweep windows"},
    {"--buckets", "buckets", "similarity buckets"},
    {"--backend", "backend", "mock:<policy> or http"},
    {"--model", "model", "model id for evaluation"},
    {"--base-url", "base_url", "endpoint URL"},
    {"--temperature", "temperature", "sampling temperature"},
    {"--max-output", "max_output", "completion token cap"},
    {"--concurrency", "concurrency", "requests in flight"},
    {"--rpm", "rpm", "requests per minute (0 = unlimited)"},
    {"--max-attempts", "max_attempts", "attempts per request"},
    {"--cache-dir", "cache_dir", "completion cache directory"},
    {"--templates-dir", "templates_dir", "prompt template overrides"},
    {"--oracle-model", "oracle_model", "model writing oracle reasoning"},
    {"--reorg-model", "reorg_model", "model adding reasoning tags"},
    {"--max-records", "max_records", "cap on instruction records (0 = all)"},
    {"--reject-log", "reject_log", "where to log rejected reasoning"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavior simulation benchmark toolkit", "behavesim"};
  app.require_subcommand(1);
  std::string config_file;
  std::map<std::string, std::string> flag_values;
  bool split = false;
  std::string manifest_path;

  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, runner] : runners()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_file, "key = value settings file");
    for (const auto& f : kFlags) sub->add_option(f.flag, flag_values[f.key], f.help);
    if (name == "build-qa") sub->add_flag("--split", split, "also write train/test splits");
    subs[name] = sub;
  }
  auto* replay_cmd = app.add_subcommand("replay", "re-run the stage recorded in a manifest");
  replay_cmd->add_option("--manifest", manifest_path, "manifest to replay")->required();
  std::string replay_out;
  replay_cmd->add_option("--out", replay_out, "override the output path");

  if (argc > 1 && argv[1][0] != '-' && !runners().count(argv[1]) &&
      std::string(argv[1]) != "replay") {
    std::cerr << "unknown subcommand '" << argv[1] << "'\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (replay_cmd->parsed()) {
      replay(manifest_path, replay_out);
      return 0;
    }
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      RunConfig config = defaults();
      if (!config_file.empty()) merge_config_file(config, config_file);
      merge_env(config);
      for (const auto& f : kFlags) {
        if (sub->count(f.flag) > 0) config[f.key] = flag_values[f.key];
      }
      if (split) config["split"] = "true";
      runners().at(name)(config);
      return 0;
    }
  } catch (const Failure& f) {
    std::cerr << Json{{"error", f.code}, {"message", f.message}}.dump() << "\n";
    return f.usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}
