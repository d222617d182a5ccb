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

// HTTP transport for the chat and embedding backends.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <memory>
#include <string>

#include "behavesim/llm_gateway.h"
#include "behavesim/text_features.h"
#include "json.hpp"

namespace behavesim {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kInvalidArgument, "endpoint URL needs a scheme: " + url);
  }
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  e.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

std::unique_ptr<httplib::Client> make_client(const Endpoint& e,
                                             const std::string& api_key,
                                             std::chrono::seconds timeout) {
  auto client = std::make_unique<httplib::Client>(e.origin);
  client->set_connection_timeout(std::chrono::seconds(10));
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  if (!api_key.empty()) client->set_bearer_token_auth(api_key);
  return client;
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string base_url, std::string api_key,
                                 std::chrono::seconds timeout)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      timeout_(timeout) {
  split_url(base_url_);
}

BackendResponse HttpChatBackend::send(const CompletionRequest& request) {
  auto endpoint = split_url(base_url_);
  auto client = make_client(endpoint, api_key_, timeout_);
  BackendResponse out;
  auto res = client->Post(endpoint.path + "/chat/completions",
                          build_chat_request_body(request), "application/json");
  if (!res) {
    out.transport_error = true;
    out.error_message = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  if (res->status != 200) {
    out.error_message = res->body.substr(0, 500);
    return out;
  }
  try {
    out.text = parse_chat_response_body(res->body);
  } catch (const Error& e) {
    out.transport_error = true;
    out.error_message = e.what();
  }
  return out;
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string api_key,
                           std::string model, std::size_t batch_size)
    : base_url_(std::move(base_url)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      batch_size_(batch_size == 0 ? 1 : batch_size) {
  split_url(base_url_);
}

std::vector<Embedding> HttpEmbedder::embed(const std::vector<std::string>& texts) {
  auto endpoint = split_url(base_url_);
  auto client = make_client(endpoint, api_key_, std::chrono::seconds(120));
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size_) {
    auto end = std::min(texts.size(), begin + batch_size_);
    nlohmann::json body;
    body["model"] = model_;
    body["input"] = std::vector<std::string>(texts.begin() + begin, texts.begin() + end);
    auto res = client->Post(endpoint.path + "/embeddings", body.dump(),
                            "application/json");
    if (!res) {
      fail(ErrorCode::kEmbedderUnavailable,
           "embedding request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      fail(ErrorCode::kEmbedderUnavailable,
           "embedding endpoint returned HTTP " + std::to_string(res->status));
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& data = j.at("data");
      if (data.size() != end - begin) {
        fail(ErrorCode::kEmbedderUnavailable, "embedding count mismatch");
      }
      std::vector<Embedding> batch(data.size());
      for (std::size_t pos = 0; pos < data.size(); ++pos) {
        const auto& item = data[pos];
        auto idx = item.contains("index") ? item.at("index").get<std::size_t>() : pos;
        if (idx >= batch.size()) fail(ErrorCode::kEmbedderUnavailable, "bad index");
        batch[idx] = item.at("embedding").get<Embedding>();
      }
      for (auto& v : batch) out.push_back(std::move(v));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorCode::kEmbedderUnavailable,
           std::string("unexpected embedding body: ") + e.what());
    }
  }
  return out;
}

}  // namespace behavesim
