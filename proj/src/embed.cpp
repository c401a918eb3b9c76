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

#include "spandetect/embed.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spandetect/error.hpp"
#include "spandetect/util.hpp"

namespace spandetect {

SpanEmbedding span_embedding(const TokenVectors& vectors, SpanRef span) {
  if (span.len == 0 || span.end() > vectors.size()) {
    fail(ErrorCode::kInvalidArgument,
         "span [" + std::to_string(span.start) + ", " + std::to_string(span.end()) +
             ") out of bounds for " + std::to_string(vectors.size()) + " tokens");
  }
  std::vector<double> acc(vectors.dim, 0.0);
  for (std::uint32_t t = span.start; t < span.end(); ++t) {
    const auto row = vectors[t];
    for (std::size_t d = 0; d < vectors.dim; ++d) acc[d] += row[d];
  }
  SpanEmbedding out;
  out.values.resize(vectors.dim);
  bool all_zero = true;
  for (std::size_t d = 0; d < vectors.dim; ++d) {
    out.values[d] = static_cast<float>(acc[d] / span.len);
    all_zero = all_zero && out.values[d] == 0.0f;
  }
  out.degenerate = all_zero;
  return out;
}

Similarity cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::kMismatch, "cosine of vectors with dims " + std::to_string(a.size()) +
                                   " and " + std::to_string(b.size()));
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return {0.0, true};
  const double c = dot / (std::sqrt(aa) * std::sqrt(bb));
  return {std::clamp(c, -1.0, 1.0), false};
}

nlohmann::json EmbedderConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["dim"] = dim;
  if (kind == "reference") {
    j["context_mix"] = context_mix;
    j["seed"] = seed;
  } else {
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["batch_size"] = batch_size;
    j["max_in_flight"] = max_in_flight;
    j["window_tokens"] = window_tokens;
    j["window_overlap"] = window_overlap;
    j["timeout_seconds"] = timeout_seconds;
  }
  return j;
}

EmbedderConfig EmbedderConfig::from_json(const nlohmann::json& j) {
  EmbedderConfig c;
  try {
    c.kind = j.value("kind", c.kind);
    c.dim = j.value("dim", c.dim);
    c.context_mix = j.value("context_mix", c.context_mix);
    c.seed = j.value("seed", c.seed);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.window_tokens = j.value("window_tokens", c.window_tokens);
    c.window_overlap = j.value("window_overlap", c.window_overlap);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad embedder config: ") + e.what());
  }
  return c;
}

std::vector<TokenVectors> Embedder::embed_batch(std::span<const TokenizedDoc> docs) const {
  std::vector<TokenVectors> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(embed(doc));
  return out;
}

ReferenceEmbedder::ReferenceEmbedder(EmbedderConfig config) : config_(std::move(config)) {
  if (config_.dim == 0) fail(ErrorCode::kInvalidArgument, "embedder dim must be positive");
  if (!(config_.context_mix >= 0.0) || !std::isfinite(config_.context_mix)) {
    fail(ErrorCode::kInvalidArgument, "context_mix must be a finite non-negative number");
  }
}

std::string ReferenceEmbedder::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "reference/v1;dim=" << config_.dim << ";mix=" << config_.context_mix
     << ";seed=" << config_.seed;
  return os.str();
}

std::vector<float> ReferenceEmbedder::token_vector(std::string_view token) const {
  Fnv1a h;
  h.update_pod(config_.seed);
  h.update(token);
  std::mt19937_64 engine(h.digest());
  auto unit = [&] { return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53; };

  // Box-Muller; written out so the stream is identical across standard libraries.
  std::vector<double> g(config_.dim);
  for (std::size_t d = 0; d < config_.dim; d += 2) {
    const double r = std::sqrt(-2.0 * std::log(unit()));
    const double theta = 2.0 * std::numbers::pi * unit();
    g[d] = r * std::cos(theta);
    if (d + 1 < config_.dim) g[d + 1] = r * std::sin(theta);
  }
  double norm = 0.0;
  for (double x : g) norm += x * x;
  norm = std::sqrt(norm);
  std::vector<float> out(config_.dim);
  for (std::size_t d = 0; d < config_.dim; ++d) out[d] = static_cast<float>(g[d] / norm);
  return out;
}

TokenVectors ReferenceEmbedder::embed(const TokenizedDoc& doc) const {
  if (doc.empty()) fail(ErrorCode::kInvalidArgument, "cannot embed empty document \"" + doc.doc_id + "\"");
  const std::size_t m = doc.size();
  const std::size_t dim = config_.dim;
  std::vector<std::vector<float>> base;
  base.reserve(m);
  for (const auto& tok : doc.tokens) base.push_back(token_vector(tok));

  TokenVectors out;
  out.doc_id = doc.doc_id;
  out.dim = dim;
  out.data.resize(m * dim);
  const double mix = config_.context_mix;
  for (std::size_t t = 0; t < m; ++t) {
    auto row = out.row(t);
    for (std::size_t d = 0; d < dim; ++d) {
      double v = base[t][d];
      if (mix != 0.0) {
        if (t > 0) v += mix * base[t - 1][d];
        if (t + 1 < m) v += mix * base[t + 1][d];
      }
      row[d] = static_cast<float>(v);
    }
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  if (config.kind == "reference") return std::make_unique<ReferenceEmbedder>(config);
  if (config.kind == "remote") return std::make_unique<RemoteEmbedder>(config);
  fail(ErrorCode::kInvalidArgument, "unknown embedder kind \"" + config.kind + "\"");
}

std::vector<TokenWindow> plan_windows(std::size_t token_count, std::size_t window, std::size_t overlap) {
  if (window == 0 || overlap >= window) {
    fail(ErrorCode::kInvalidArgument, "window overlap must be smaller than the window");
  }
  std::vector<TokenWindow> out;
  if (token_count == 0) return out;
  const std::size_t step = window - overlap;
  for (std::size_t begin = 0;; begin += step) {
    const std::size_t end = std::min(begin + window, token_count);
    out.push_back({begin, end});
    if (end == token_count) break;
  }
  return out;
}

}  // namespace spandetect
