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

#include "behavesim/llm_gateway.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "behavesim/digest.h"
#include "behavesim/rng.h"
#include "behavesim/text_util.h"
#include "json.hpp"

namespace behavesim {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kDefaultOmCotScript = R"(
{"key": "oracle:*", "responses": ["Looking at the observed options, they differ in topic and tone, and only some of them fit the way this user usually writes. The user's history shows repeated engagement with closely related posts from the same period, which points toward the option that continues that pattern. {{decision}}"]}
{"key": "reorganize:*", "responses": ["<ANA>The observed options differ in topic and tone, and only some of them fit the way this user usually writes.</ANA>\n<MEM>The user's history shows repeated engagement with closely related posts from the same period, which points toward the option that continues that pattern.</MEM>\n{{decision}}"]}
{"key": "*", "responses": ["<ANA>The observed options differ in topic and tone.</ANA>\n<MEM>The user's recent behaviors match one of them closely.</MEM>\n{{decision}}"]}
)";

std::string metadata_or(const CompletionRequest& r, const std::string& key,
                        const std::string& fallback) {
  auto it = r.metadata.find(key);
  return it == r.metadata.end() ? fallback : it->second;
}

std::string decision_from_metadata(const CompletionRequest& r) {
  auto decision = metadata_or(r, "decision", "");
  if (!decision.empty()) return decision;
  auto gold = metadata_or(r, "gold_letter", "");
  if (gold.empty()) return "I cannot decide.";
  return "Therefore, the answer is (" + gold + ").";
}

ErrorCode classify_status(int status) {
  if (status == 401 || status == 403) return ErrorCode::kAuthError;
  if (status == 400 || status == 413) return ErrorCode::kOversizeInput;
  return ErrorCode::kBackendRejected;
}

bool retryable(const BackendResponse& r) {
  return r.transport_error || r.status == 429 || r.status == 408 ||
         (r.status >= 500 && r.status <= 599);
}

}  // namespace

void CompletionRequest::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    fail(ErrorCode::kInvalidArgument, "temperature must be in [0, 2]");
  }
  if (max_output <= 0) {
    fail(ErrorCode::kInvalidArgument, "max_output must be positive");
  }
  if (request_id.empty()) {
    fail(ErrorCode::kInvalidArgument, "request_id must be set");
  }
}

std::string build_chat_request_body(const CompletionRequest& request) {
  Json body;
  body["model"] = request.model_id;
  Json messages = Json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output;
  return body.dump();
}

std::string parse_chat_response_body(const std::string& body) {
  try {
    auto j = Json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const std::exception& e) {
    fail(ErrorCode::kInvalidArgument,
         std::string("unexpected chat completion body: ") + e.what());
  }
}

void ScriptBook::add(std::string key, std::vector<std::string> responses) {
  if (responses.empty()) {
    fail(ErrorCode::kInvalidArgument, "script '" + key + "' has no responses");
  }
  std::lock_guard lock(*mu_);
  scripts_[std::move(key)] = std::move(responses);
}

ScriptBook ScriptBook::parse(std::string_view jsonl) {
  ScriptBook book;
  std::size_t line_no = 0;
  for (auto line : split(jsonl, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = Json::parse(line);
      book.add(j.at("key").get<std::string>(),
               j.at("responses").get<std::vector<std::string>>());
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::kMalformedLine,
           "script line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return book;
}

ScriptBook ScriptBook::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open script " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

ScriptBook ScriptBook::default_omcot() { return parse(kDefaultOmCotScript); }

std::string ScriptBook::next(const CompletionRequest& request) {
  const auto qid = metadata_or(request, "question_id", "");
  const auto stage = metadata_or(request, "stage", "");
  std::vector<std::string> keys;
  if (!qid.empty()) {
    keys.push_back(request.model_id + ":" + qid);
    keys.push_back(qid);
    if (!stage.empty()) keys.push_back(stage + ":" + qid);
  }
  keys.push_back(request.model_id + ":*");
  if (!stage.empty()) keys.push_back(stage + ":*");
  keys.push_back("*");

  std::string reply;
  {
    std::lock_guard lock(*mu_);
    for (const auto& key : keys) {
      auto it = scripts_.find(key);
      if (it == scripts_.end()) continue;
      // Counters are per (key, question) so concurrent questions sharing a
      // wildcard script do not perturb each other.
      auto& n = calls_[key + "#" + qid];
      reply = it->second[std::min(n, it->second.size() - 1)];
      ++n;
      break;
    }
  }
  return render_placeholders(
      reply, {{"gold_letter", metadata_or(request, "gold_letter", "")},
              {"gold_text", metadata_or(request, "gold_text", "")},
              {"decision", decision_from_metadata(request)}});
}

MockPolicy MockPolicy::parse(std::string_view spec) {
  auto colon = spec.find(':');
  auto head = ascii_lower(trim(spec.substr(0, colon)));
  auto arg = colon == std::string_view::npos ? std::string_view{}
                                             : trim(spec.substr(colon + 1));
  MockPolicy p;
  if (head == "always-gold") {
    p.kind = Kind::kAlwaysGold;
  } else if (head == "uniform-random") {
    p.kind = Kind::kUniformRandom;
    if (!arg.empty()) {
      try {
        p.seed = std::stoull(std::string(arg));
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidArgument, "bad uniform-random seed");
      }
    }
  } else if (head == "fixed-letter") {
    if (arg.size() != 1 || arg[0] < 'A' || arg[0] > 'Z') {
      fail(ErrorCode::kInvalidArgument, "fixed-letter needs one letter A-Z");
    }
    p.kind = Kind::kFixedLetter;
    p.letter = arg[0];
  } else if (head == "scripted-cot") {
    p.kind = Kind::kScriptedCot;
    p.scripts = std::make_shared<ScriptBook>(
        arg.empty() ? ScriptBook::default_omcot()
                    : ScriptBook::load_file(std::string(arg)));
  } else {
    fail(ErrorCode::kInvalidArgument,
         "unknown mock policy '" + std::string(spec) + "'");
  }
  return p;
}

std::string MockPolicy::describe() const {
  switch (kind) {
    case Kind::kAlwaysGold:
      return "always-gold";
    case Kind::kUniformRandom:
      return "uniform-random:" + std::to_string(seed);
    case Kind::kFixedLetter:
      return std::string("fixed-letter:") + letter;
    case Kind::kScriptedCot:
      return "scripted-cot";
  }
  return "unknown";
}

BackendResponse MockBackend::send(const CompletionRequest& request) {
  BackendResponse r;
  switch (policy_.kind) {
    case MockPolicy::Kind::kAlwaysGold:
      r.text = decision_from_metadata(request);
      break;
    case MockPolicy::Kind::kUniformRandom: {
      int n = 4;
      try {
        n = std::stoi(metadata_or(request, "n_options", "4"));
      } catch (const std::exception&) {
      }
      n = std::clamp(n, 1, 26);
      std::uint64_t h = fnv1a64(request.system_text, policy_.seed);
      h = fnv1a64(request.user_text, h);
      h = fnv1a64(metadata_or(request, "trial", "0"), h);
      SeededRng rng(splitmix64(h));
      char letter = static_cast<char>('A' + rng.below(static_cast<std::uint64_t>(n)));
      r.text = std::string("Therefore, the answer is (") + letter + ").";
      break;
    }
    case MockPolicy::Kind::kFixedLetter:
      r.text = std::string("Therefore, the answer is (") + policy_.letter + ").";
      break;
    case MockPolicy::Kind::kScriptedCot:
      r.text = policy_.scripts ? policy_.scripts->next(request) : "";
      break;
  }
  return r;
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner, std::string dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (!inner_) fail(ErrorCode::kInvalidArgument, "cache needs a backend");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create cache dir " + dir_ + ": " + ec.message());
}

std::string CachingBackend::key_for(const CompletionRequest& r) const {
  Json key{{"backend", inner_->name()},     {"request_id", r.request_id},
           {"model", r.model_id},           {"system", r.system_text},
           {"user", r.user_text},           {"temperature", r.temperature},
           {"max_output", r.max_output}};
  return sha256_hex(key.dump());
}

BackendResponse CachingBackend::send(const CompletionRequest& request) {
  const auto path = std::filesystem::path(dir_) / (key_for(request) + ".json");
  if (std::ifstream in(path, std::ios::binary); in) {
    try {
      BackendResponse hit;
      hit.text = Json::parse(in).at("text").get<std::string>();
      return hit;
    } catch (const std::exception&) {
      // Unreadable entry: fall through and overwrite it.
    }
  }
  auto response = inner_->send(request);
  if (!response.transport_error && response.status == 200) {
    auto tmp = path;
    tmp += ".tmp" + std::to_string(fnv1a64(request.request_id));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << Json{{"request_id", request.request_id}, {"text", response.text}}.dump();
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
  }
  return response;
}

RateLimiter::RateLimiter(double requests_per_minute, double burst,
                         std::function<Clock::time_point()> now)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      now_(std::move(now)) {
  last_ = now_();
}

std::chrono::nanoseconds RateLimiter::reserve() {
  if (rate_per_sec_ <= 0.0) return std::chrono::nanoseconds(0);
  std::lock_guard lock(mu_);
  auto now = now_();
  double elapsed = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
  tokens_ -= 1.0;
  if (tokens_ >= 0.0) return std::chrono::nanoseconds(0);
  return std::chrono::nanoseconds(
      static_cast<std::int64_t>(std::ceil(-tokens_ / rate_per_sec_ * 1e9)));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      limiter_(options_.requests_per_minute,
               static_cast<double>(std::max<std::size_t>(options_.concurrency, 1))),
      slots_(static_cast<std::ptrdiff_t>(
          std::clamp<std::size_t>(options_.concurrency, 1, 4096))) {
  if (!backend_) fail(ErrorCode::kInvalidArgument, "gateway needs a backend");
  if (options_.concurrency == 0 || options_.concurrency > 4096) {
    fail(ErrorCode::kInvalidArgument, "concurrency must be in [1, 4096]");
  }
  if (options_.retry.max_attempts < 1) {
    fail(ErrorCode::kInvalidArgument, "max_attempts must be >= 1");
  }
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::nanoseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
}

std::chrono::nanoseconds Gateway::backoff_delay(int attempt,
                                                std::uint64_t salt) {
  // Full jitter: uniform in [0, min(cap, base * factor^(attempt - 1))].
  double ceiling = std::chrono::duration<double, std::nano>(options_.retry.base_delay).count() *
                   std::pow(options_.retry.factor, attempt - 1);
  ceiling = std::min(
      ceiling, std::chrono::duration<double, std::nano>(options_.retry.max_delay).count());
  SeededRng rng(derive_seed(options_.jitter_seed ^ salt,
                            static_cast<std::uint64_t>(attempt)));
  return std::chrono::nanoseconds(static_cast<std::int64_t>(rng.unit() * ceiling));
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
  request.validate();
  {
    std::lock_guard lock(mu_);
    if (!seen_ids_.insert(request.request_id).second) {
      fail(ErrorCode::kInvalidArgument,
           "request_id reused: " + request.request_id);
    }
    ++usage_.issued;
  }
  auto record_failure = [&](ErrorCode code, const std::string& message) {
    std::lock_guard lock(mu_);
    ++usage_.failed;
    ++usage_.errors[std::string(error_code_name(code))];
    return Error(code, message);
  };

  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t salt = fnv1a64(request.request_id);
  BackendResponse last;
  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (auto wait = limiter_.reserve(); wait.count() > 0) options_.sleep(wait);
    slots_.acquire();
    {
      std::lock_guard lock(mu_);
      ++in_flight_;
      ++usage_.attempts;
      usage_.max_in_flight = std::max(usage_.max_in_flight, in_flight_);
    }
    try {
      last = backend_->send(request);
    } catch (const std::exception& e) {
      last = BackendResponse{};
      last.transport_error = true;
      last.error_message = e.what();
    }
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    slots_.release();

    if (!last.transport_error && last.status == 200) {
      CompletionResult result;
      result.request_id = request.request_id;
      result.raw_text = std::move(last.text);
      result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      result.attempt_count = attempt;
      result.backend = backend_->name();
      std::lock_guard lock(mu_);
      ++usage_.answered;
      return result;
    }
    if (!retryable(last)) {
      throw record_failure(classify_status(last.status),
                     "HTTP " + std::to_string(last.status) + " for " +
                         request.request_id + ": " + last.error_message);
    }
    if (attempt < options_.retry.max_attempts) {
      options_.sleep(backoff_delay(attempt, salt));
    }
  }
  throw record_failure(ErrorCode::kBackendExhausted,
                 "gave up on " + request.request_id + " after " +
                     std::to_string(options_.retry.max_attempts) +
                     " attempts (last: " +
                     (last.transport_error ? last.error_message
                                           : "HTTP " + std::to_string(last.status)) +
                     ")");
}

std::vector<Gateway::Outcome> Gateway::complete_batch(
    const std::vector<CompletionRequest>& requests) {
  std::vector<Outcome> outcomes(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      auto& out = outcomes[i];
      out.request_id = requests[i].request_id;
      try {
        out.result = complete(requests[i]);
      } catch (const Error& e) {
        out.error = e.code();
        out.message = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(options_.concurrency, requests.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
  }
  return outcomes;
}

Usage Gateway::usage() const {
  std::lock_guard lock(mu_);
  return usage_;
}

std::shared_ptr<Backend> make_backend(const std::string& spec,
                                      const std::string& base_url,
                                      const std::string& api_key) {
  if (spec == "http") {
    if (base_url.empty()) {
      fail(ErrorCode::kInvalidArgument,
           "http backend needs an endpoint URL (BEHAVESIM_API_BASE)");
    }
    return std::make_shared<HttpChatBackend>(base_url, api_key);
  }
  if (spec.starts_with("mock")) {
    auto rest = spec.size() > 5 ? spec.substr(5) : std::string("always-gold");
    return std::make_shared<MockBackend>(MockPolicy::parse(rest));
  }
  fail(ErrorCode::kInvalidArgument, "unknown backend '" + spec + "'");
}

}  // namespace behavesim
