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

// Builders and fakes shared by the unit tests and the acceptance binary.

#ifndef BEHAVESIM_TESTS_TEST_SUPPORT_H_
#define BEHAVESIM_TESTS_TEST_SUPPORT_H_

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "behavesim/behavior_model.h"
#include "behavesim/error.h"
#include "behavesim/llm_gateway.h"
#include "behavesim/qa_builder.h"
#include "behavesim/text_features.h"

namespace behavesim::testing {

inline UtcSeconds at(const char* text) { return parse_timestamp(text); }

inline UtcSeconds far_future() { return at("2100-01-01 00:00:00"); }

inline BehaviorRecord record(UtcSeconds ts, std::string type,
                             std::optional<std::string> target,
                             std::optional<std::string> content,
                             std::optional<std::string> community = std::nullopt) {
  BehaviorRecord b;
  b.timestamp = ts;
  b.type_name = std::move(type);
  b.target = std::move(target);
  b.content = std::move(content);
  b.community = std::move(community);
  return b;
}

// `n` Reddit comments/posts one hour apart, texts tagged with the username.
inline UserTimeline reddit_user(const std::string& name, std::size_t n,
                                UtcSeconds start = at("2024-01-01 00:00:00")) {
  UserProfile p{name, "test user " + name, {"testing"}, Platform::kReddit};
  std::vector<BehaviorRecord> bs;
  for (std::size_t i = 0; i < n; ++i) {
    auto ts = start + std::chrono::hours(i);
    auto idx = std::to_string(i);
    if (i % 3 == 0) {
      bs.push_back(record(ts, "post", std::nullopt, name + " post " + idx, "c"));
    } else {
      bs.push_back(record(ts, "comment", name + " thread " + idx,
                          name + " reply " + idx, "c"));
    }
  }
  return make_timeline(std::move(p), std::move(bs));
}

// Embeddings and sentiments set by hand; unknown texts get a zero vector.
class TableEmbedder : public Embedder {
 public:
  std::map<std::string, Embedding> table;
  std::size_t dim = 2;

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out;
    for (const auto& t : texts) {
      auto it = table.find(t);
      out.push_back(it == table.end() ? Embedding(dim, 0.0f) : it->second);
    }
    return out;
  }
  std::string name() const override { return "table"; }
};

class TableSentiment : public Sentimenter {
 public:
  std::map<std::string, double> table;
  double score(std::string_view text) const override {
    auto it = table.find(std::string(text));
    return it == table.end() ? 0.0 : it->second;
  }
};

// Replies with a scripted status sequence per request id (the last status
// repeats), then 200. Tracks the peak number of concurrent sends.
class FaultBackend : public Backend {
 public:
  std::map<std::string, std::vector<int>> statuses;
  std::vector<int> default_statuses;
  std::chrono::microseconds hold{0};

  BackendResponse send(const CompletionRequest& request) override {
    auto now = ++in_flight_;
    for (auto peak = peak_.load(); now > peak && !peak_.compare_exchange_weak(peak, now);) {
    }
    if (hold.count() > 0) std::this_thread::sleep_for(hold);
    BackendResponse r;
    {
      std::lock_guard lock(mu_);
      auto n = calls_[request.request_id]++;
      auto it = statuses.find(request.request_id);
      const auto& seq = it == statuses.end() ? default_statuses : it->second;
      r.status = n < seq.size() ? seq[n] : 200;
      ++total_;
    }
    if (r.status == 0) {
      r.transport_error = true;
      r.error_message = "connection reset";
    }
    r.text = "Therefore, the answer is (A).";
    --in_flight_;
    return r;
  }
  std::string name() const override { return "fault"; }

  std::size_t calls(const std::string& id) {
    std::lock_guard lock(mu_);
    return calls_[id];
  }
  std::size_t total() {
    std::lock_guard lock(mu_);
    return total_;
  }
  std::size_t peak() const { return peak_.load(); }

 private:
  std::mutex mu_;
  std::map<std::string, std::size_t> calls_;
  std::size_t total_ = 0;
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
};

inline GatewayOptions no_sleep_options(std::size_t concurrency = 4) {
  GatewayOptions o;
  o.concurrency = concurrency;
  o.sleep = [](std::chrono::nanoseconds) {};
  return o;
}

inline CompletionRequest request_with_id(const std::string& id) {
  CompletionRequest r;
  r.system_text = "system";
  r.user_text = "user " + id;
  r.model_id = "m";
  r.request_id = id;
  return r;
}

// A handful of Reddit users and every question built from them.
struct SmallWorld {
  std::vector<UserTimeline> corpus;
  std::vector<ElementQuestion> questions;

  explicit SmallWorld(std::size_t users = 6, std::size_t behaviors = 20,
                      std::uint64_t seed = 7) {
    for (std::size_t u = 0; u < users; ++u) {
      corpus.push_back(reddit_user("user" + std::to_string(u), behaviors));
    }
    HashingEmbedder embedder(64);
    LexiconSentiment sentiment;
    QuestionSetConfig config;
    config.seed = seed;
    questions = build_questions(corpus, BehaviorRegistry::default_registry(), config,
                                embedder, sentiment)
                    .questions;
  }
};

inline std::shared_ptr<Backend> scripted(ScriptBook book) {
  MockPolicy policy;
  policy.kind = MockPolicy::Kind::kScriptedCot;
  policy.scripts = std::make_shared<ScriptBook>(std::move(book));
  return std::make_shared<MockBackend>(policy);
}

// Runs `fn` and returns the ErrorCode it threw, or kOk.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("behavesim_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace behavesim::testing

#endif  // BEHAVESIM_TESTS_TEST_SUPPORT_H_
