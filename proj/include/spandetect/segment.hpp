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
#include <vector>

#include "spandetect/score.hpp"
#include "spandetect/tokenize.hpp"

namespace spandetect {

/// Standardized (length, reliability) pairs for every (start, len) cell of a
/// text of `token_count` tokens with len <= n_max. Cells never set read as
/// missing.
class ScoreGrid {
 public:
  ScoreGrid(std::size_t token_count, std::size_t n_max);
  static ScoreGrid from_table(const SpanTable& table);

  std::size_t token_count() const noexcept { return m_; }
  std::size_t n_max() const noexcept { return n_max_; }

  void set(std::size_t start, std::size_t len, double length_std, double reliability_std);
  bool has(std::size_t start, std::size_t len) const;
  double length_std(std::size_t start, std::size_t len) const;
  double reliability_std(std::size_t start, std::size_t len) const;

  /// alpha * length_std + (1 - alpha) * reliability_std of one cell.
  double contribution(std::size_t start, std::size_t len, double alpha) const;

 private:
  std::size_t slot(std::size_t start, std::size_t len) const;

  std::size_t m_;
  std::size_t n_max_;
  std::vector<double> length_;
  std::vector<double> reliability_;
};

/// A gap-free, overlap-free cover of tokens [0, m) in text order.
struct Segmentation {
  std::vector<SpanRef> spans;
  double objective = 0.0;  // mean contribution over the spans
  double alpha = 0.0;

  bool operator==(const Segmentation&) const = default;
};

struct SegmentOptions {
  // Seed every cell with a single zero score and no predecessor instead of
  // starting from an empty prefix. The zero acts as an extra segment in every
  // running average. Cells that never beat it fall back to their best
  // candidate predecessor so a cover can still be traced.
  bool literal_init = false;
};

/// Span break search over prefix cells 0..m. Cell i keeps the running score
/// list of the best way found to cover tokens [0, i); candidate j (i - N <= j
/// < i, visited in increasing order) replaces it only on a strictly higher
/// average, so the earliest j wins ties. The objective can miss the global
/// optimum because averages are not prefix-optimal.
Segmentation segment_dp(const ScoreGrid& grid, double alpha, const SegmentOptions& options = {});

/// Mean contribution of an explicit cover; throws if the spans do not tile
/// the text or a cell is missing.
double replay_objective(const ScoreGrid& grid, std::span<const SpanRef> spans, double alpha);

/// True global maximizer of the mean objective over every composition of m
/// into parts <= n_max (lexicographically earliest on ties). Exponential;
/// limited to m <= kExhaustiveLimit.
inline constexpr std::size_t kExhaustiveLimit = 14;
Segmentation segment_exhaustive(const ScoreGrid& grid, double alpha);

/// Checks the cover invariants; throws on violation.
void validate_segmentation(std::span<const SpanRef> spans, std::size_t token_count, std::size_t n_max);

/// {0, 0.125, ..., 1.0}.
std::vector<double> sweep_alpha_values();

}  // namespace spandetect
