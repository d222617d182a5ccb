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

// Pluggable text scorers used for distractor selection and reasoning
// analysis: sentence embedders and sentiment scorers.

#ifndef BEHAVESIM_TEXT_FEATURES_H_
#define BEHAVESIM_TEXT_FEATURES_H_

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace behavesim {

using Embedding = std::vector<float>;

// Cosine similarity in [-1, 1]; 0 when either vector is all zeros.
double cosine(const Embedding& a, const Embedding& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per input, same order. Throws EmbedderUnavailable.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
  virtual std::string name() const = 0;

  Embedding embed_one(const std::string& text) { return embed({text}).front(); }
};

// Signed feature hashing of word unigrams and bigrams, L2-normalized.
// Deterministic and offline; empty text maps to the zero vector.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::string name() const override;

 private:
  std::size_t dim_;
};

// Calls an OpenAI-compatible /embeddings endpoint.
class HttpEmbedder : public Embedder {
 public:
  // `base_url` like "http://localhost:8000/v1"; requests go to
  // base_url + "/embeddings".
  HttpEmbedder(std::string base_url, std::string api_key, std::string model,
               std::size_t batch_size = 64);
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::string name() const override { return "http:" + model_; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
  std::size_t batch_size_;
};

// Memoizes another embedder by exact text. Thread-safe.
class CachingEmbedder : public Embedder {
 public:
  explicit CachingEmbedder(std::shared_ptr<Embedder> inner)
      : inner_(std::move(inner)) {}
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;
  std::string name() const override { return inner_->name(); }

 private:
  std::shared_ptr<Embedder> inner_;
  std::mutex mu_;
  std::unordered_map<std::string, Embedding> cache_;
};

class Sentimenter {
 public:
  virtual ~Sentimenter() = default;
  // Polarity in [-1, 1].
  virtual double score(std::string_view text) const = 0;
};

// (positive - negative) / (positive + negative) over a small bilingual word
// list, with one-token negation flipping. 0 when no lexicon word occurs.
class LexiconSentiment : public Sentimenter {
 public:
  double score(std::string_view text) const override;
};

}  // namespace behavesim

#endif  // BEHAVESIM_TEXT_FEATURES_H_
