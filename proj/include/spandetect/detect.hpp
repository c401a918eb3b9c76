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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spandetect/datastore.hpp"
#include "spandetect/embed.hpp"
#include "spandetect/score.hpp"
#include "spandetect/segment.hpp"

namespace spandetect {

inline constexpr int kEvidenceSchemaVersion = 1;

enum class SpanColor { kHumanRed, kNeutralGreen, kLlmBlue };

/// red below 0.5, green at exactly 0.5, blue above.
SpanColor color_for(double prediction) noexcept;
std::string_view to_string(SpanColor color) noexcept;

/// Mean prediction over the selected spans; 0 for an empty list.
double overall_prediction(std::span<const double> predictions);

/// LLM iff the score strictly exceeds the threshold.
Label decide(double p_overall, double epsilon) noexcept;

struct EvidenceNeighbor {
  std::string text;
  Label label = Label::kHuman;
  double similarity = 0.0;
  std::string doc_id;
  std::uint32_t start = 0;
};

struct EvidenceEntry {
  SpanRef span;
  std::string text;
  SpanScores scores;  // neighbours cleared; see `neighbors`
  std::vector<EvidenceNeighbor> neighbors;
  SpanColor color = SpanColor::kNeutralGreen;
};

struct DetectionResult {
  std::string doc_id;
  std::string text;
  double p_overall = 0.0;
  double threshold = 0.5;
  Label label = Label::kHuman;
  double alpha = 0.0;
  std::size_t k = 0;
  Segmentation segmentation;
  std::vector<EvidenceEntry> evidence;
  std::string store_fingerprint;
  double elapsed_ms = 0.0;  // not part of the evidence JSON
};

/// Versioned evidence document consumed by the UI and `detect --json`.
nlohmann::ordered_json to_evidence_json(const DetectionResult& result);

struct DetectParams {
  double alpha = 0.5;
  std::size_t k = 10;
  double epsilon = 0.5;
  std::size_t n_max = 20;
  SegmentOptions segment;
  KnnOptions knn;
};

/// A text with every candidate span already retrieved and standardized.
/// Segmentation and thresholding are cheap to repeat on it.
struct PreparedText {
  TokenizedDoc doc;
  SpanTable table;
  ScoreGrid grid{0, 1};
};

/// Runs tokenize -> embed -> score -> standardize -> segment -> threshold.
/// Holds references; the store, embedder and stats must outlive it.
class Detector {
 public:
  Detector(const SpanStore& store, const Embedder& embedder, NormStats stats);

  const SpanStore& store() const noexcept { return store_; }
  const Embedder& embedder() const noexcept { return embedder_; }
  const NormStats& stats() const noexcept { return stats_; }

  PreparedText prepare(std::string_view doc_id, std::string_view text, std::size_t k, std::size_t n_max,
                       const KnnOptions& knn = {}) const;
  PreparedText prepare(TokenizedDoc doc, const TokenVectors& vectors, std::size_t k, std::size_t n_max,
                       const KnnOptions& knn = {}) const;

  /// Segments and classifies without evidence assembly.
  double score(const PreparedText& text, double alpha, const SegmentOptions& segment = {}) const;

  DetectionResult finish(const PreparedText& text, double alpha, double epsilon, std::size_t k,
                         const SegmentOptions& segment = {}) const;

  DetectionResult detect(std::string_view text, const DetectParams& params,
                         std::string_view doc_id = "input") const;

 private:
  const SpanStore& store_;
  const Embedder& embedder_;
  NormStats stats_;
};

}  // namespace spandetect
