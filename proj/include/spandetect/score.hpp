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
#include <vector>

#include <json.hpp>

#include "spandetect/datastore.hpp"
#include "spandetect/embed.hpp"
#include "spandetect/tokenize.hpp"

namespace spandetect {

/// Length, reliability and prediction scores of one target span.
///
///   length      = number of tokens in the span
///   reliability = mean similarity of the retrieved neighbours
///   prediction  = fraction of retrieved neighbours labelled LLM
///
/// Both means run over the neighbours actually retrieved. A span with no
/// neighbours gets reliability 0 and the neutral prediction 0.5.
struct SpanScores {
  SpanRef span;
  std::size_t length = 0;
  double reliability = 0.0;
  double prediction = 0.5;
  double length_std = 0.0;
  double reliability_std = 0.0;
  std::size_t llm_count = 0;
  bool no_evidence = true;
  std::vector<Neighbor> neighbors;

  std::size_t k_effective() const noexcept { return neighbors.size(); }
};

SpanScores score_from_neighbors(SpanRef span, std::vector<Neighbor> neighbors);

SpanScores score_span(const SpanStore& store, const TokenVectors& vectors, SpanRef span, std::size_t k,
                      const KnnOptions& options = {});

/// Mean and standard deviation used to put length and reliability on one scale.
struct NormStats {
  double mean_length = 0.0;
  double std_length = 1.0;
  double mean_reliability = 0.0;
  double std_reliability = 1.0;
  bool length_degenerate = false;       // std was zero and replaced by 1
  bool reliability_degenerate = false;  // likewise
  std::size_t population = 0;
  std::string corpus_id;
  std::string split;
  std::string store_fingerprint;

  nlohmann::json to_json() const;
  static NormStats from_json(const nlohmann::json& j);
};

/// Population statistics (divide by N) over the given score values.
NormStats fit_norm_stats(std::span<const double> lengths, std::span<const double> reliabilities);

SpanScores standardize(SpanScores scores, const NormStats& stats);

/// Scores for every candidate span of one document, addressed by (start, len).
class SpanTable {
 public:
  SpanTable() = default;
  SpanTable(std::size_t token_count, std::size_t n_max);

  std::size_t token_count() const noexcept { return token_count_; }
  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t size() const noexcept { return cells_.size(); }

  bool contains(std::size_t start, std::size_t len) const noexcept {
    return len >= 1 && len <= n_max_ && start + len <= token_count_;
  }
  SpanScores& at(std::size_t start, std::size_t len);
  const SpanScores& at(std::size_t start, std::size_t len) const;

  std::vector<SpanScores>& cells() noexcept { return cells_; }
  const std::vector<SpanScores>& cells() const noexcept { return cells_; }

 private:
  std::size_t index(std::size_t start, std::size_t len) const;

  std::size_t token_count_ = 0;
  std::size_t n_max_ = 0;
  std::vector<std::size_t> row_offset_;  // first cell of each start
  std::vector<SpanScores> cells_;
};

/// Retrieves neighbours for every span of length 1..n_max and fills in the
/// raw scores. Standardized fields are left at zero.
SpanTable score_all_spans(const SpanStore& store, const TokenVectors& vectors, std::size_t n_max,
                          std::size_t k, const KnnOptions& options = {});

void standardize(SpanTable& table, const NormStats& stats);

}  // namespace spandetect
