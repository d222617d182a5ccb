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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <thread>

// Same configuration as the library build, so the header is seen identically.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "behavesim/text_features.h"
#include "json.hpp"
#include "test_support.h"

namespace behavesim {
namespace {

using testing::code_of;
using testing::FaultBackend;
using testing::no_sleep_options;
using testing::request_with_id;

TEST(Gateway, TwoRateLimitsThenSuccess) {
  auto backend = std::make_shared<FaultBackend>();
  backend->statuses["r"] = {429, 429};
  Gateway gw(backend, no_sleep_options());
  auto result = gw.complete(request_with_id("r"));
  EXPECT_EQ(result.attempt_count, 3);
  EXPECT_EQ(backend->calls("r"), 3u);
  EXPECT_EQ(gw.usage().attempts, 3u);
  EXPECT_EQ(gw.usage().answered, 1u);
}

TEST(Gateway, ServerErrorsExhaustAfterFiveAttempts) {
  auto backend = std::make_shared<FaultBackend>();
  backend->statuses["r"] = {500, 502, 503, 500, 500, 500};
  Gateway gw(backend, no_sleep_options());
  EXPECT_EQ(code_of([&] { gw.complete(request_with_id("r")); }), ErrorCode::kBackendExhausted);
  EXPECT_EQ(backend->calls("r"), 5u);
  EXPECT_EQ(gw.usage().errors.at("BackendExhausted"), 1u);
}

TEST(Gateway, TransportErrorsAndTimeoutsRetry) {
  auto backend = std::make_shared<FaultBackend>();
  backend->statuses["t"] = {0, 408};
  Gateway gw(backend, no_sleep_options());
  EXPECT_EQ(gw.complete(request_with_id("t")).attempt_count, 3);
}

TEST(Gateway, NonRetryableStatusesFailOnce) {
  struct Case {
    int status;
    ErrorCode code;
  };
  for (auto c : {Case{401, ErrorCode::kAuthError}, Case{403, ErrorCode::kAuthError},
                 Case{400, ErrorCode::kOversizeInput}, Case{413, ErrorCode::kOversizeInput},
                 Case{404, ErrorCode::kBackendRejected}}) {
    auto backend = std::make_shared<FaultBackend>();
    backend->statuses["r"] = {c.status};
    Gateway gw(backend, no_sleep_options());
    EXPECT_EQ(code_of([&] { gw.complete(request_with_id("r")); }), c.code) << c.status;
    EXPECT_EQ(backend->calls("r"), 1u) << c.status;
  }
}

TEST(Gateway, BackoffIsBoundedJitteredAndSeeded) {
  auto run = [](std::uint64_t seed) {
    std::vector<std::chrono::nanoseconds> sleeps;
    auto backend = std::make_shared<FaultBackend>();
    backend->statuses["r"] = {500, 500, 500, 500, 500};
    auto options = no_sleep_options();
    options.jitter_seed = seed;
    options.sleep = [&](std::chrono::nanoseconds d) { sleeps.push_back(d); };
    Gateway gw(backend, options);
    code_of([&] { gw.complete(request_with_id("r")); });
    return sleeps;
  };
  auto a = run(1);
  ASSERT_EQ(a.size(), 4u);  // no sleep after the final attempt
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a[i].count(), 0);
    EXPECT_LE(a[i], std::chrono::seconds(1 << i));
  }
  EXPECT_EQ(a, run(1));
  EXPECT_NE(a, run(2));
}

TEST(Gateway, MaxDelayCapsBackoff) {
  std::vector<std::chrono::nanoseconds> sleeps;
  auto backend = std::make_shared<FaultBackend>();
  backend->statuses["r"] = std::vector<int>(9, 503);
  auto options = no_sleep_options();
  options.retry.max_attempts = 10;
  options.retry.max_delay = std::chrono::milliseconds(3000);
  options.sleep = [&](std::chrono::nanoseconds d) { sleeps.push_back(d); };
  Gateway gw(backend, options);
  EXPECT_EQ(gw.complete(request_with_id("r")).attempt_count, 10);
  for (auto d : sleeps) EXPECT_LE(d, std::chrono::milliseconds(3000));
}

TEST(Gateway, ReusedRequestIdRejected) {
  Gateway gw(std::make_shared<FaultBackend>(), no_sleep_options());
  gw.complete(request_with_id("same"));
  EXPECT_EQ(code_of([&] { gw.complete(request_with_id("same")); }), ErrorCode::kInvalidArgument);
}

TEST(Gateway, InvalidRequestRejected) {
  Gateway gw(std::make_shared<FaultBackend>(), no_sleep_options());
  auto r = request_with_id("");
  EXPECT_EQ(code_of([&] { gw.complete(r); }), ErrorCode::kInvalidArgument);
}

TEST(Gateway, BadOptionsRejected) {
  auto options = no_sleep_options(0);
  EXPECT_EQ(code_of([&] { Gateway(std::make_shared<FaultBackend>(), options); }),
            ErrorCode::kInvalidArgument);
}

TEST(Gateway, BatchRespectsConcurrencyAndOrder) {
  for (std::size_t c : {1u, 3u, 8u}) {
    auto backend = std::make_shared<FaultBackend>();
    backend->hold = std::chrono::microseconds(300);
    backend->default_statuses = {429};
    Gateway gw(backend, no_sleep_options(c));
    std::vector<CompletionRequest> reqs;
    for (int i = 0; i < 200; ++i) reqs.push_back(request_with_id("q" + std::to_string(i)));
    auto out = gw.complete_batch(reqs);
    ASSERT_EQ(out.size(), 200u);
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out[i].request_id, reqs[i].request_id);
      ASSERT_TRUE(out[i].result.has_value());
      EXPECT_EQ(out[i].result->attempt_count, 2);
    }
    EXPECT_LE(backend->peak(), c);
    EXPECT_LE(gw.usage().max_in_flight, c);
    EXPECT_EQ(gw.usage().attempts, 400u);
  }
}

TEST(RateLimiter, TokenBucketWithFakeClock) {
  auto now = RateLimiter::Clock::time_point{};
  RateLimiter limiter(60.0, 2.0, [&] { return now; });
  EXPECT_EQ(limiter.reserve().count(), 0);
  EXPECT_EQ(limiter.reserve().count(), 0);
  auto wait = limiter.reserve();  // bucket empty: one token per second
  EXPECT_NEAR(std::chrono::duration<double>(wait).count(), 1.0, 1e-6);
  now += std::chrono::seconds(10);
  EXPECT_EQ(limiter.reserve().count(), 0);
  RateLimiter off(0.0, 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(off.reserve().count(), 0);
}

CompletionRequest mock_request(const std::string& id, const std::string& gold, int n = 4) {
  auto r = request_with_id(id);
  r.metadata = {{"gold_letter", gold}, {"n_options", std::to_string(n)}};
  return r;
}

TEST(MockBackend, Policies) {
  MockBackend gold(MockPolicy::parse("always-gold"));
  EXPECT_EQ(gold.send(mock_request("a", "C")).text, "Therefore, the answer is (C).");
  MockBackend fixed(MockPolicy::parse("fixed-letter:B"));
  EXPECT_EQ(fixed.send(mock_request("a", "C")).text, "Therefore, the answer is (B).");
  EXPECT_EQ(code_of([] { MockPolicy::parse("fixed-letter:b1"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { MockPolicy::parse("psychic"); }), ErrorCode::kInvalidArgument);
}

TEST(MockBackend, UniformRandomIsSeededAndRoughlyUniform) {
  MockBackend a(MockPolicy::parse("uniform-random:5"));
  MockBackend b(MockPolicy::parse("uniform-random:5"));
  std::map<std::string, int> counts;
  for (int i = 0; i < 4000; ++i) {
    auto r = mock_request("x" + std::to_string(i), "A");
    auto text = a.send(r).text;
    EXPECT_EQ(text, b.send(r).text);
    ++counts[text];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [text, n] : counts) EXPECT_NEAR(n / 4000.0, 0.25, 0.03) << text;
}

TEST(ScriptBook, KeyPrecedenceAndSequence) {
  ScriptBook book;
  book.add("*", {"fallback"});
  book.add("oracle:*", {"stage wildcard"});
  book.add("q1", {"first", "second"});
  book.add("big:q1", {"model specific"});
  auto r = request_with_id("x");
  r.metadata = {{"question_id", "q1"}, {"stage", "oracle"}};
  EXPECT_EQ(book.next(r), "first");
  EXPECT_EQ(book.next(r), "second");
  EXPECT_EQ(book.next(r), "second");  // last reply repeats
  r.model_id = "big";
  EXPECT_EQ(book.next(r), "model specific");
  r.model_id = "m";
  r.metadata["question_id"] = "q2";
  EXPECT_EQ(book.next(r), "stage wildcard");
  r.metadata.erase("stage");
  EXPECT_EQ(book.next(r), "fallback");
}

TEST(ScriptBook, PlaceholdersAndParsing) {
  auto book = ScriptBook::parse(
      R"({"key":"*","responses":["gold {{gold_letter}} {{gold_text}} | {{decision}}"]})");
  auto r = request_with_id("x");
  r.metadata = {{"gold_letter", "D"}, {"gold_text", "txt"}};
  EXPECT_EQ(book.next(r), "gold D txt | Therefore, the answer is (D).");
  EXPECT_EQ(code_of([] { ScriptBook::parse("{broken"); }), ErrorCode::kMalformedLine);
}

TEST(CachingBackend, SecondCallIsServedFromDisk) {
  testing::TempDir dir("cache");
  auto inner = std::make_shared<FaultBackend>();
  CachingBackend cache(inner, dir.path().string());
  auto r = request_with_id("c1");
  auto first = cache.send(r);
  auto second = cache.send(r);
  EXPECT_EQ(first.text, second.text);
  EXPECT_EQ(inner->total(), 1u);
  auto other = request_with_id("c2");
  cache.send(other);
  EXPECT_EQ(inner->total(), 2u);
  EXPECT_NE(cache.key_for(r), cache.key_for(other));
}

TEST(ChatBody, RequestAndResponseShapes) {
  auto r = request_with_id("x");
  auto body = nlohmann::json::parse(build_chat_request_body(r));
  EXPECT_EQ(body["model"], "m");
  ASSERT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "user x");
  EXPECT_FALSE(body.dump().find("gold_letter") != std::string::npos);
  EXPECT_EQ(parse_chat_response_body(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
  EXPECT_EQ(code_of([] { parse_chat_response_body("{}"); }), ErrorCode::kInvalidArgument);
}

// A local OpenAI-style server that fails the first `fail_first` chat calls.
class LocalServer {
 public:
  explicit LocalServer(int fail_first, int fail_status = 429) {
    server_.Post("/v1/chat/completions", [=, this](const httplib::Request& req,
                                                   httplib::Response& res) {
      if (req.get_header_value("Authorization") != "Bearer k") {
        res.status = 401;
        return;
      }
      if (calls_++ < fail_first) {
        res.status = fail_status;
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply = {
          {"choices",
           {{{"message", {{"content", "echo " + body["messages"][1]["content"].get<std::string>()}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body);
      nlohmann::json data = nlohmann::json::array();
      for (std::size_t i = 0; i < body["input"].size(); ++i) {
        auto len = static_cast<float>(body["input"][i].get<std::string>().size());
        data.push_back({{"index", i}, {"embedding", {len, 1.0f}}});
      }
      res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int calls() const { return calls_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
};

TEST(HttpChatBackend, RetriesRateLimitsOverTheWire) {
  LocalServer server(2);
  Gateway gw(std::make_shared<HttpChatBackend>(server.url(), "k"), no_sleep_options());
  auto result = gw.complete(request_with_id("h1"));
  EXPECT_EQ(result.raw_text, "echo user h1");
  EXPECT_EQ(result.attempt_count, 3);
  EXPECT_EQ(server.calls(), 3);
}

TEST(HttpChatBackend, BadKeyIsAuthErrorWithoutRetry) {
  LocalServer server(0);
  Gateway gw(std::make_shared<HttpChatBackend>(server.url(), "wrong"), no_sleep_options());
  EXPECT_EQ(code_of([&] { gw.complete(request_with_id("h2")); }), ErrorCode::kAuthError);
  EXPECT_EQ(gw.usage().attempts, 1u);
}

TEST(HttpChatBackend, UnreachableServerExhausts) {
  auto options = no_sleep_options();
  options.retry.max_attempts = 2;
  Gateway gw(std::make_shared<HttpChatBackend>("http://127.0.0.1:1/v1", "k",
                                               std::chrono::seconds(2)),
             options);
  EXPECT_EQ(code_of([&] { gw.complete(request_with_id("h3")); }), ErrorCode::kBackendExhausted);
}

TEST(HttpEmbedder, BatchesKeepOrder) {
  LocalServer server(0);
  HttpEmbedder embedder(server.url(), "k", "e", 2);
  auto vs = embedder.embed({"a", "bbb", "cc", "dddd", "e"});
  ASSERT_EQ(vs.size(), 5u);
  EXPECT_FLOAT_EQ(vs[1][0], 3.0f);
  EXPECT_FLOAT_EQ(vs[3][0], 4.0f);
  HttpEmbedder broken("http://127.0.0.1:1/v1", "k", "e");
  EXPECT_EQ(code_of([&] { broken.embed({"x"}); }), ErrorCode::kEmbedderUnavailable);
}

}  // namespace
}  // namespace behavesim
