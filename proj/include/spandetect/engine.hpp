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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "spandetect/datastore.hpp"
#include "spandetect/detect.hpp"
#include "spandetect/embed.hpp"
#include "spandetect/eval.hpp"

namespace spandetect {

/// Environment variable that overrides the embedder endpoint recorded in a store.
inline constexpr const char* kEndpointEnv = "SPANDETECT_EMBEDDER_ENDPOINT";

struct EngineOptions {
  std::optional<std::string> endpoint;  // beats the environment and the store
  std::optional<ApproximateParams> approximate;
  std::size_t threads = 0;
};

/// Per-request overrides of the calibrated operating point.
struct DetectOverrides {
  std::optional<double> alpha;
  std::optional<std::size_t> k;
  std::optional<double> epsilon;
};

/// A loaded store, embedder and calibration, ready to classify texts.
/// Detection is safe to call from several threads at once.
class Engine {
 public:
  static std::unique_ptr<Engine> open(const std::filesystem::path& store_dir,
                                      const std::filesystem::path& calibration_path,
                                      const EngineOptions& options = {});
  Engine(SpanStore store, std::unique_ptr<Embedder> embedder, Calibration calibration);

  const SpanStore& store() const noexcept { return store_; }
  const Embedder& embedder() const noexcept { return *embedder_; }
  const Calibration& calibration() const noexcept { return calibration_; }
  const Detector& detector() const noexcept { return *detector_; }

  DetectParams params(const DetectOverrides& overrides = {}) const;
  DetectionResult detect(std::string_view text, const DetectOverrides& overrides = {}) const;

 private:
  SpanStore store_;
  std::unique_ptr<Embedder> embedder_;
  Calibration calibration_;
  std::unique_ptr<Detector> detector_;
};

/// Embedder described by the store's metadata, with the endpoint resolved
/// from `endpoint`, then the environment, then the metadata.
std::unique_ptr<Embedder> embedder_for_store(const SpanStore& store, const std::optional<std::string>& endpoint);

}  // namespace spandetect
