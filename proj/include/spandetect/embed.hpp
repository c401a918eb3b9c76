/*
 * Copyright (c) 2026, The spandetect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spandetect/tokenize.hpp"

namespace spandetect {

/// One contextual vector per token, stored row-major.
struct TokenVectors {
  std::string doc_id;
  std::size_t dim = 0;
  std::vector<float> data;

  std::size_t size() const noexcept { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> operator[](std::size_t token) const {
    return {data.data() + token * dim, dim};
  }
  std::span<float> row(std::size_t token) { return {data.data() + token * dim, dim}; }
};

struct SpanEmbedding {
  std::vector<float> values;
  bool degenerate = false;  // all components zero
};

struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // one side was a zero vector; value is 0 by definition
};

/// Mean of the span's token vectors, accumulated in double.
SpanEmbedding span_embedding(const TokenVectors& vectors, SpanRef span);

Similarity cosine(std::span<const float> a, std::span<const float> b);
inline Similarity cosine(const SpanEmbedding& a, const SpanEmbedding& b) {
  return cosine(a.values, b.values);
}

struct EmbedderConfig {
  std::string kind = "reference";  // "reference" | "remote"
  std::size_t dim = 64;

  // reference backend
  double context_mix = 0.25;
  std::uint64_t seed = 0;

  // remote backend
  std::string endpoint;  // e.g. http://127.0.0.1:9000/embed
  std::string model = "default";  // identity of the served model; part of the fingerprint
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  std::size_t window_tokens = 256;
  std::size_t window_overlap = 32;
  double timeout_seconds = 30.0;

  nlohmann::json to_json() const;
  static EmbedderConfig from_json(const nlohmann::json& j);
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;
  /// Identifies the vector space; stores refuse queries from a different one.
  virtual std::string fingerprint() const = 0;
  virtual const EmbedderConfig& config() const = 0;

  virtual TokenVectors embed(const TokenizedDoc& doc) const = 0;
  virtual std::vector<TokenVectors> embed_batch(std::span<const TokenizedDoc> docs) const;
};

/// Hashed token vectors: each token string seeds a fixed pseudo-random unit
/// vector, optionally blended with its immediate neighbours so that vectors
/// depend on local context. Identical token sequences in identical contexts
/// therefore produce bit-identical vectors.
class ReferenceEmbedder final : public Embedder {
 public:
  explicit ReferenceEmbedder(EmbedderConfig config);

  std::size_t dim() const override { return config_.dim; }
  std::string fingerprint() const override;
  const EmbedderConfig& config() const override { return config_; }
  TokenVectors embed(const TokenizedDoc& doc) const override;

  /// Context-free unit vector for one token string.
  std::vector<float> token_vector(std::string_view token) const;

 private:
  EmbedderConfig config_;
};

/// Client for an HTTP embedding service.
///
/// Request:  POST {"texts": [["tok", ...], ...]}
/// Response: {"embeddings": [[[f, ...] per token] per text]}
///
/// Documents longer than `window_tokens` are split into overlapping windows;
/// each token takes its vector from the window where it sits farthest from an
/// edge. At most `max_in_flight` requests run at once across all callers.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig config);
  ~RemoteEmbedder() override;

  std::size_t dim() const override { return config_.dim; }
  std::string fingerprint() const override;
  const EmbedderConfig& config() const override { return config_; }
  TokenVectors embed(const TokenizedDoc& doc) const override;
  std::vector<TokenVectors> embed_batch(std::span<const TokenizedDoc> docs) const override;

 private:
  struct Impl;
  EmbedderConfig config_;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

/// Half-open token index range.
struct TokenWindow {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TokenWindow&) const = default;
};

/// Overlapping windows covering `token_count` tokens.
std::vector<TokenWindow> plan_windows(std::size_t token_count, std::size_t window, std::size_t overlap);

}  // namespace spandetect
