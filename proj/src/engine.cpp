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


#include "spandetect/engine.hpp"

#include <cstdlib>

#include "spandetect/error.hpp"

namespace spandetect {

std::unique_ptr<Embedder> embedder_for_store(const SpanStore& store, const std::optional<std::string>& endpoint) {
  EmbedderConfig cfg = store.metadata().embedder;
  if (endpoint) {
    cfg.endpoint = *endpoint;
  } else if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0') {
    cfg.endpoint = env;
  }
  auto embedder = make_embedder(cfg);
  if (embedder->fingerprint() != store.metadata().embedder_fingerprint) {
    fail(ErrorCode::kMismatch, "embedder \"" + embedder->fingerprint() + "\" does not match the store's \"" +
                                   store.metadata().embedder_fingerprint + "\"");
  }
  return embedder;
}

std::unique_ptr<Engine> Engine::open(const std::filesystem::path& store_dir,
                                     const std::filesystem::path& calibration_path, const EngineOptions& options) {
  SpanStore store = SpanStore::load(store_dir);
  if (options.approximate) store.enable_approximate(*options.approximate);
  auto embedder = embedder_for_store(store, options.endpoint);
  Calibration cal = load_calibration(calibration_path.string());
  return std::make_unique<Engine>(std::move(store), std::move(embedder), std::move(cal));
}

Engine::Engine(SpanStore store, std::unique_ptr<Embedder> embedder, Calibration calibration)
    : store_(std::move(store)), embedder_(std::move(embedder)), calibration_(std::move(calibration)) {
  if (!embedder_) fail(ErrorCode::kInvalidArgument, "no embedder");
  if (calibration_.store_fingerprint != store_.fingerprint()) {
    fail(ErrorCode::kMismatch, "calibration was fitted against store " + calibration_.store_fingerprint +
                                   ", but the loaded store is " + store_.fingerprint());
  }
  if (calibration_.n_max > store_.n_max()) {
    fail(ErrorCode::kMismatch, "calibration n_max exceeds the store's");
  }
  detector_ = std::make_unique<Detector>(store_, *embedder_, calibration_.stats);
}

DetectParams Engine::params(const DetectOverrides& overrides) const {
  DetectParams p;
  p.alpha = overrides.alpha.value_or(calibration_.alpha);
  p.k = overrides.k.value_or(calibration_.k);
  p.epsilon = overrides.epsilon.value_or(calibration_.epsilon);
  p.n_max = calibration_.n_max;
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  if (p.k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  return p;
}

DetectionResult Engine::detect(std::string_view text, const DetectOverrides& overrides) const {
  return detector_->detect(text, params(overrides));
}

}  // namespace spandetect
