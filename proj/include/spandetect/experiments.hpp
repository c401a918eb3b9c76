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
#include <vector>

#include <json.hpp>

#include "spandetect/corpus.hpp"
#include "spandetect/datastore.hpp"
#include "spandetect/detect.hpp"
#include "spandetect/eval.hpp"

namespace spandetect {

inline constexpr int kReportVersion = 1;

struct PipelineOptions {
  std::size_t k = 10;
  std::size_t n_max = 0;  // 0: the store's n_max
  double target_fpr = 0.01;
  std::size_t threads = 0;
  bool per_domain_thresholds = true;
  SegmentOptions segment;
  KnnOptions knn;
  nlohmann::json run_config;  // echoed verbatim into reports
};

/// Raw (unstandardized) score tables for every document of `docs`, in order.
std::vector<PreparedText> score_documents(const SpanStore& store, const Embedder& embedder, const Corpus& docs,
                                          std::size_t k, std::size_t n_max, std::size_t threads,
                                          const KnnOptions& knn = {});

/// Length/reliability statistics over every candidate span of the prepared texts.
NormStats fit_norm_stats(const std::vector<PreparedText>& raw);

/// Scores the validation split against the store and fits the statistics.
NormStats fit_norm_stats(const SpanStore& store, const Corpus& validation, const Embedder& embedder,
                         std::size_t n_max, std::size_t k, std::size_t threads = 0);

/// Standardizes raw tables in place and builds their score grids.
void apply_norm_stats(std::vector<PreparedText>& texts, const NormStats& stats);

std::vector<ScoredExample> score_examples(const Detector& detector, const Corpus& docs,
                                          const std::vector<PreparedText>& prepared, double alpha,
                                          const SegmentOptions& segment = {}, std::size_t threads = 0);

/// Evaluates every grid alpha on the validation texts (threshold at the target
/// FPR on validation humans, then accuracy) and keeps the best.
Calibration select_alpha(const Detector& detector, const Corpus& validation,
                         const std::vector<PreparedText>& prepared, const PipelineOptions& options);

/// fit_norm_stats + select_alpha on the corpus' validation split.
Calibration calibrate(const SpanStore& store, const Embedder& embedder, const Corpus& corpus,
                      const PipelineOptions& options);

/// Test-split metrics at the calibrated operating point.
nlohmann::ordered_json evaluate(const SpanStore& store, const Embedder& embedder, const Calibration& calibration,
                                const Corpus& corpus, const PipelineOptions& options);

/// Test metrics at each grid alpha, each with its own validation threshold.
nlohmann::ordered_json sweep_alpha(const SpanStore& store, const Embedder& embedder,
                                   const Calibration& calibration, const Corpus& corpus,
                                   const PipelineOptions& options);

/// Train documents for a seeded subsample of `pairs` per label. Samples for
/// increasing sizes are nested. Corpus order is preserved.
Corpus sample_train_pairs(const Corpus& corpus, std::size_t pairs, std::uint64_t seed);

/// Rebuilds the store on nested train subsamples and reruns calibrate + evaluate.
nlohmann::ordered_json sweep_datastore_size(const Corpus& corpus, const Embedder& embedder,
                                            const std::vector<std::size_t>& sizes, std::uint64_t seed,
                                            const BuildOptions& build, const PipelineOptions& options);

}  // namespace spandetect
