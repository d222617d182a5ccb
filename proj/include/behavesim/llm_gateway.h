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

// Chat-completion access. A Backend performs one attempt; the Gateway adds
// retries with full-jitter exponential backoff, a client-side token-bucket
// rate limit, a bound on requests in flight, and usage accounting.

#ifndef BEHAVESIM_LLM_GATEWAY_H_
#define BEHAVESIM_LLM_GATEWAY_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_set>
#include <vector>

#include "behavesim/error.h"

namespace behavesim {

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.1;
  int max_output = 1024;
  std::string model_id;
  std::string request_id;
  // Side-channel for offline backends (gold letter, option count, trial,
  // question id). Never sent over the wire.
  std::map<std::string, std::string> metadata;

  // Throws InvalidArgument.
  void validate() const;
};

struct CompletionResult {
  std::string request_id;
  std::string raw_text;
  std::chrono::milliseconds latency{0};
  int attempt_count = 1;
  std::string backend;
};

// Outcome of a single attempt.
struct BackendResponse {
  int status = 200;
  std::string text;            // completion text when status == 200
  bool transport_error = false;  // timeout, refused connection, bad body
  std::string error_message;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse send(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// OpenAI-style wire format.
std::string build_chat_request_body(const CompletionRequest& request);
// Returns choices[0].message.content. Throws InvalidArgument.
std::string parse_chat_response_body(const std::string& body);

// POSTs to base_url + "/chat/completions" with a bearer credential.
class HttpChatBackend : public Backend {
 public:
  HttpChatBackend(std::string base_url, std::string api_key,
                  std::chrono::seconds timeout = std::chrono::seconds(120));
  BackendResponse send(const CompletionRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

// Canned replies for the scripted mock, keyed by "model:question_id",
// "question_id", "model:*" or "*" (first match wins). The i-th call for a
// key returns responses[min(i, n - 1)]. Replies may use {{gold_letter}},
// {{gold_text}} and {{decision}} placeholders filled from request metadata.
class ScriptBook {
 public:
  void add(std::string key, std::vector<std::string> responses);
  // Line-delimited {"key": ..., "responses": [...]}.
  static ScriptBook parse(std::string_view jsonl);
  static ScriptBook load_file(const std::string& path);
  // Bundled script producing clean oracle reasoning and tagged rewrites.
  static ScriptBook default_omcot();

  std::string next(const CompletionRequest& request);

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
  std::map<std::string, std::size_t> calls_;
  std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

struct MockPolicy {
  enum class Kind { kAlwaysGold, kUniformRandom, kFixedLetter, kScriptedCot };
  Kind kind = Kind::kAlwaysGold;
  std::uint64_t seed = 0;
  char letter = 'A';
  std::shared_ptr<ScriptBook> scripts;

  // "always-gold", "uniform-random[:seed]", "fixed-letter:X",
  // "scripted-cot[:path]".
  static MockPolicy parse(std::string_view spec);
  std::string describe() const;
};

// Offline backend. Replies are a pure function of (policy, request text,
// metadata), except scripted replies, which advance per key.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockPolicy policy) : policy_(std::move(policy)) {}
  BackendResponse send(const CompletionRequest& request) override;
  std::string name() const override { return "mock:" + policy_.describe(); }

 private:
  MockPolicy policy_;
};

// Stores successful replies on disk, keyed by a digest of the backend name,
// request id, model and prompt, so an interrupted run can resume without
// paying for completed requests again.
class CachingBackend : public Backend {
 public:
  CachingBackend(std::shared_ptr<Backend> inner, std::string dir);
  BackendResponse send(const CompletionRequest& request) override;
  std::string name() const override { return inner_->name(); }

  std::string key_for(const CompletionRequest& request) const;

 private:
  std::shared_ptr<Backend> inner_;
  std::string dir_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  std::chrono::milliseconds max_delay{60000};
};

// Token bucket refilled at rpm / 60 tokens per second.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  // rpm <= 0 disables limiting.
  RateLimiter(double requests_per_minute, double burst,
              std::function<Clock::time_point()> now = Clock::now);
  // Takes a token; returns how long the caller must wait before using it.
  std::chrono::nanoseconds reserve();

 private:
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::function<Clock::time_point()> now_;
  std::mutex mu_;
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t concurrency = 4;
  double requests_per_minute = 0.0;  // 0 = unlimited
  std::uint64_t jitter_seed = 0;
  // Injected for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::nanoseconds)> sleep;
};

struct Usage {
  std::size_t issued = 0;
  std::size_t answered = 0;
  std::size_t failed = 0;
  std::size_t attempts = 0;
  std::size_t max_in_flight = 0;
  std::map<std::string, std::size_t> errors;  // by error code name
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options);

  // Throws BackendExhausted, AuthError, OversizeInput, BackendRejected or
  // InvalidArgument (bad request, reused request_id).
  CompletionResult complete(const CompletionRequest& request);

  struct Outcome {
    std::string request_id;
    std::optional<CompletionResult> result;
    ErrorCode error = ErrorCode::kOk;
    std::string message;
  };

  // Runs up to `concurrency` requests at once. outcomes[i] answers
  // requests[i] whatever order completions arrive in.
  std::vector<Outcome> complete_batch(const std::vector<CompletionRequest>& requests);

  Usage usage() const;
  std::string backend_name() const { return backend_->name(); }
  std::size_t concurrency() const { return options_.concurrency; }

 private:
  std::chrono::nanoseconds backoff_delay(int attempt, std::uint64_t salt);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  RateLimiter limiter_;
  std::counting_semaphore<4096> slots_;
  mutable std::mutex mu_;
  Usage usage_;
  std::size_t in_flight_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

// Splits "mock:<policy>" / "http" style backend specs.
std::shared_ptr<Backend> make_backend(const std::string& spec,
                                      const std::string& base_url,
                                      const std::string& api_key);

}  // namespace behavesim

#endif  // BEHAVESIM_LLM_GATEWAY_H_
