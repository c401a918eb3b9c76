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

#include "spandetect/score.hpp"

#include <algorithm>
#include <cmath>

#include "spandetect/error.hpp"

namespace spandetect {

SpanScores score_from_neighbors(SpanRef span, std::vector<Neighbor> neighbors) {
  SpanScores s;
  s.span = span;
  s.length = span.len;
  s.neighbors = std::move(neighbors);
  if (s.neighbors.empty()) {
    s.reliability = 0.0;
    s.prediction = 0.5;
    s.no_evidence = true;
    return s;
  }
  double sum = 0.0;
  for (const auto& n : s.neighbors) {
    sum += n.similarity;
    if (n.label == Label::kLlm) ++s.llm_count;
  }
  const auto k = static_cast<double>(s.neighbors.size());
  s.reliability = sum / k;
  s.prediction = static_cast<double>(s.llm_count) / k;
  s.no_evidence = false;
  return s;
}

SpanScores score_span(const SpanStore& store, const TokenVectors& vectors, SpanRef span, std::size_t k,
                      const KnnOptions& options) {
  const SpanEmbedding e = span_embedding(vectors, span);
  return score_from_neighbors(span, store.knn(e.values, span.len, k, options));
}

nlohmann::json NormStats::to_json() const {
  return {{"mean_length", mean_length},
          {"std_length", std_length},
          {"mean_reliability", mean_reliability},
          {"std_reliability", std_reliability},
          {"length_degenerate", length_degenerate},
          {"reliability_degenerate", reliability_degenerate},
          {"population", population},
          {"corpus_id", corpus_id},
          {"split", split},
          {"store_fingerprint", store_fingerprint}};
}

NormStats NormStats::from_json(const nlohmann::json& j) {
  NormStats s;
  try {
    s.mean_length = j.at("mean_length").get<double>();
    s.std_length = j.at("std_length").get<double>();
    s.mean_reliability = j.at("mean_reliability").get<double>();
    s.std_reliability = j.at("std_reliability").get<double>();
    s.length_degenerate = j.value("length_degenerate", false);
    s.reliability_degenerate = j.value("reliability_degenerate", false);
    s.population = j.value("population", std::size_t{0});
    s.corpus_id = j.value("corpus_id", std::string{});
    s.split = j.value("split", std::string{});
    s.store_fingerprint = j.value("store_fingerprint", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad normalization stats: ") + e.what());
  }
  if (!(s.std_length > 0.0) || !(s.std_reliability > 0.0)) {
    fail(ErrorCode::kParse, "normalization stats must have positive standard deviations");
  }
  return s;
}

namespace {

struct Moments {
  double mean;
  double std;
  bool degenerate;
};

Moments moments(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  // Relative guard: a spread this small is rounding noise around a constant.
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) return {mean, 1.0, true};
  return {mean, sd, false};
}

}  // namespace

NormStats fit_norm_stats(std::span<const double> lengths, std::span<const double> reliabilities) {
  if (lengths.empty() || reliabilities.empty()) {
    fail(ErrorCode::kInvalidArgument, "cannot fit normalization stats on an empty population");
  }
  const Moments l = moments(lengths);
  const Moments r = moments(reliabilities);
  NormStats s;
  s.mean_length = l.mean;
  s.std_length = l.std;
  s.length_degenerate = l.degenerate;
  s.mean_reliability = r.mean;
  s.std_reliability = r.std;
  s.reliability_degenerate = r.degenerate;
  s.population = lengths.size();
  return s;
}

SpanScores standardize(SpanScores scores, const NormStats& stats) {
  scores.length_std = (static_cast<double>(scores.length) - stats.mean_length) / stats.std_length;
  scores.reliability_std = (scores.reliability - stats.mean_reliability) / stats.std_reliability;
  return scores;
}

SpanTable::SpanTable(std::size_t token_count, std::size_t n_max)
    : token_count_(token_count), n_max_(n_max) {
  row_offset_.reserve(token_count + 1);
  std::size_t total = 0;
  for (std::size_t start = 0; start < token_count; ++start) {
    row_offset_.push_back(total);
    total += std::min(n_max, token_count - start);
  }
  row_offset_.push_back(total);
  cells_.resize(total);
  for (std::size_t start = 0; start < token_count; ++start) {
    for (std::size_t len = 1; len <= std::min(n_max, token_count - start); ++len) {
      auto& c = cells_[index(start, len)];
      c.span = {static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(len)};
      c.length = len;
    }
  }
}

std::size_t SpanTable::index(std::size_t start, std::size_t len) const {
  if (!contains(start, len)) {
    fail(ErrorCode::kInvalidArgument, "span (" + std::to_string(start) + ", " + std::to_string(len) +
                                          ") outside score table");
  }
  return row_offset_[start] + (len - 1);
}

SpanScores& SpanTable::at(std::size_t start, std::size_t len) { return cells_[index(start, len)]; }
const SpanScores& SpanTable::at(std::size_t start, std::size_t len) const { return cells_[index(start, len)]; }

SpanTable score_all_spans(const SpanStore& store, const TokenVectors& vectors, std::size_t n_max,
                          std::size_t k, const KnnOptions& options) {
  if (n_max > store.n_max()) {
    fail(ErrorCode::kInvalidArgument, "n_max " + std::to_string(n_max) + " exceeds the store's " +
                                          std::to_string(store.n_max()));
  }
  SpanTable table(vectors.size(), n_max);
  for (auto& cell : table.cells()) cell = score_span(store, vectors, cell.span, k, options);
  return table;
}

void standardize(SpanTable& table, const NormStats& stats) {
  for (auto& cell : table.cells()) cell = standardize(std::move(cell), stats);
}

}  // namespace spandetect
