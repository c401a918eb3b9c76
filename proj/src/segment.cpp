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

#include "spandetect/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spandetect/error.hpp"

namespace spandetect {

ScoreGrid::ScoreGrid(std::size_t token_count, std::size_t n_max)
    : m_(token_count),
      n_max_(n_max),
      length_(token_count * n_max, std::numeric_limits<double>::quiet_NaN()),
      reliability_(token_count * n_max, std::numeric_limits<double>::quiet_NaN()) {
  if (n_max == 0) fail(ErrorCode::kInvalidArgument, "n_max must be at least 1");
}

ScoreGrid ScoreGrid::from_table(const SpanTable& table) {
  ScoreGrid grid(table.token_count(), table.n_max());
  for (const auto& c : table.cells()) grid.set(c.span.start, c.span.len, c.length_std, c.reliability_std);
  return grid;
}

std::size_t ScoreGrid::slot(std::size_t start, std::size_t len) const {
  if (len < 1 || len > n_max_ || start + len > m_) {
    fail(ErrorCode::kInvalidArgument,
         "span (" + std::to_string(start) + ", " + std::to_string(len) + ") outside score grid");
  }
  return start * n_max_ + (len - 1);
}

void ScoreGrid::set(std::size_t start, std::size_t len, double length_std, double reliability_std) {
  if (!std::isfinite(length_std) || !std::isfinite(reliability_std)) {
    fail(ErrorCode::kInvalidArgument, "standardized scores must be finite");
  }
  const auto s = slot(start, len);
  length_[s] = length_std;
  reliability_[s] = reliability_std;
}

bool ScoreGrid::has(std::size_t start, std::size_t len) const {
  if (len < 1 || len > n_max_ || start + len > m_) return false;
  return !std::isnan(length_[start * n_max_ + (len - 1)]);
}

double ScoreGrid::length_std(std::size_t start, std::size_t len) const { return length_[slot(start, len)]; }

double ScoreGrid::reliability_std(std::size_t start, std::size_t len) const {
  return reliability_[slot(start, len)];
}

double ScoreGrid::contribution(std::size_t start, std::size_t len, double alpha) const {
  if (!has(start, len)) {
    fail(ErrorCode::kInvalidArgument,
         "missing score for span (" + std::to_string(start) + ", " + std::to_string(len) + ")");
  }
  const auto s = slot(start, len);
  return alpha * length_[s] + (1.0 - alpha) * reliability_[s];
}

namespace {

struct Cell {
  double sum = 0.0;
  std::size_t count = 0;
  std::ptrdiff_t back = -1;

  double average() const {
    return count == 0 ? -std::numeric_limits<double>::infinity() : sum / static_cast<double>(count);
  }
};

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
}

}  // namespace

Segmentation segment_dp(const ScoreGrid& grid, double alpha, const SegmentOptions& options) {
  check_alpha(alpha);
  const std::size_t m = grid.token_count();
  const std::size_t n_max = grid.n_max();
  Segmentation out;
  out.alpha = alpha;
  if (m == 0) return out;

  std::vector<Cell> dp(m + 1);
  if (options.literal_init) {
    for (auto& c : dp) c = Cell{0.0, 1, -1};
  }

  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t lo = i > n_max ? i - n_max : 0;
    double fallback_avg = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t fallback = -1;
    for (std::size_t j = lo; j < i; ++j) {
      const double c = grid.contribution(j, i - j, alpha);
      const double sum = dp[j].sum + c;
      const std::size_t count = dp[j].count + 1;
      const double candidate = sum / static_cast<double>(count);
      if (dp[i].average() < candidate) dp[i] = Cell{sum, count, static_cast<std::ptrdiff_t>(j)};
      if (fallback < 0 || fallback_avg < candidate) {
        fallback_avg = candidate;
        fallback = static_cast<std::ptrdiff_t>(j);
      }
    }
    if (dp[i].back < 0) dp[i].back = fallback;  // only reachable with literal_init
  }

  std::vector<SpanRef> reversed;
  for (std::size_t i = m; i > 0;) {
    const auto j = static_cast<std::size_t>(dp[i].back);
    reversed.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i - j)});
    i = j;
  }
  out.spans.assign(reversed.rbegin(), reversed.rend());
  out.objective = options.literal_init ? replay_objective(grid, out.spans, alpha) : dp[m].average();
  return out;
}

void validate_segmentation(std::span<const SpanRef> spans, std::size_t token_count, std::size_t n_max) {
  std::size_t next = 0;
  for (const auto& s : spans) {
    if (s.start != next) fail(ErrorCode::kInternal, "segmentation has a gap or overlap at token " + std::to_string(next));
    if (s.len < 1 || s.len > n_max) fail(ErrorCode::kInternal, "segment length outside 1..n_max");
    next += s.len;
  }
  if (next != token_count) fail(ErrorCode::kInternal, "segmentation does not cover the text");
}

double replay_objective(const ScoreGrid& grid, std::span<const SpanRef> spans, double alpha) {
  validate_segmentation(spans, grid.token_count(), grid.n_max());
  if (spans.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : spans) sum += grid.contribution(s.start, s.len, alpha);
  return sum / static_cast<double>(spans.size());
}

namespace {

struct Exhaustive {
  const ScoreGrid& grid;
  double alpha;
  std::vector<SpanRef> current;
  std::vector<SpanRef> best;
  double best_avg = -std::numeric_limits<double>::infinity();
  bool found = false;

  void run(std::size_t pos, double sum) {
    const std::size_t m = grid.token_count();
    if (pos == m) {
      const double avg = sum / static_cast<double>(current.size());
      if (!found || best_avg < avg) {
        best_avg = avg;
        best = current;
        found = true;
      }
      return;
    }
    for (std::size_t len = 1; len <= grid.n_max() && pos + len <= m; ++len) {
      current.push_back({static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(len)});
      run(pos + len, sum + grid.contribution(pos, len, alpha));
      current.pop_back();
    }
  }
};

}  // namespace

Segmentation segment_exhaustive(const ScoreGrid& grid, double alpha) {
  check_alpha(alpha);
  if (grid.token_count() > kExhaustiveLimit) {
    fail(ErrorCode::kInvalidArgument, "exhaustive segmentation is limited to " +
                                          std::to_string(kExhaustiveLimit) + " tokens");
  }
  Segmentation out;
  out.alpha = alpha;
  if (grid.token_count() == 0) return out;
  Exhaustive search{grid, alpha, {}, {}};
  search.run(0, 0.0);
  out.spans = std::move(search.best);
  out.objective = search.best_avg;
  return out;
}

std::vector<double> sweep_alpha_values() {
  std::vector<double> out;
  for (int i = 0; i <= 8; ++i) out.push_back(0.125 * i);
  return out;
}

}  // namespace spandetect
