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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dp_oracle.hpp"
#include "spandetect/error.hpp"
#include "spandetect/segment.hpp"
#include "test_support.hpp"

namespace {

using namespace spandetect;

TEST(SegmentDp, SingleToken) {
  ScoreGrid g(1, 20);
  g.set(0, 1, 0.7, -0.3);
  const auto s = segment_dp(g, 0.25);
  ASSERT_EQ(s.spans.size(), 1u);
  EXPECT_EQ(s.spans[0], (SpanRef{0, 1}));
  EXPECT_DOUBLE_EQ(s.objective, 0.25 * 0.7 + 0.75 * -0.3);
}

TEST(SegmentDp, EmptyText) {
  const auto s = segment_dp(ScoreGrid(0, 4), 0.5);
  EXPECT_TRUE(s.spans.empty());
}

TEST(SegmentDp, LengthOnlyMatchesTranscription) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng() % 9;
    const auto g = sdtest::random_grid(rng, m, m + rng() % 3);
    const auto got = segment_dp(g, 1.0);
    const auto want = sdtest::transcribe_segmentation(g, 1.0);
    EXPECT_EQ(got.spans, want.spans);
    EXPECT_EQ(got.objective, want.objective);
  }
}

TEST(SegmentDp, IncreasingLengthRewardPicksWholeText) {
  for (std::size_t m = 1; m <= 12; ++m) {
    ScoreGrid g(m, m + 2);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t len = 1; s + len <= m; ++len) g.set(s, len, -1.0 + 0.3 * static_cast<double>(len), 0.42);
    }
    const auto seg = segment_dp(g, 1.0);
    ASSERT_EQ(seg.spans.size(), 1u) << m;
    EXPECT_EQ(seg.spans[0], (SpanRef{0, static_cast<std::uint32_t>(m)}));
  }
}

TEST(SegmentDp, MatchesTranscriptionOnRandomInstances) {
  std::mt19937_64 rng(32);
  const auto grid_alphas = sweep_alpha_values();
  for (int t = 0; t < 400; ++t) {
    const std::size_t m = 1 + rng() % 16;
    const std::size_t n = 1 + rng() % 6;
    const auto g = sdtest::random_grid(rng, m, n);
    const double alpha = grid_alphas[rng() % grid_alphas.size()];
    for (bool literal : {false, true}) {
      SegmentOptions opt;
      opt.literal_init = literal;
      const auto got = segment_dp(g, alpha, opt);
      const auto want = sdtest::transcribe_segmentation(g, alpha, literal);
      ASSERT_EQ(got.spans, want.spans) << "m=" << m << " n=" << n << " literal=" << literal;
      EXPECT_EQ(got.objective, want.objective);
    }
  }
}

TEST(SegmentDp, LiteralInitDiffersWhenScoresAreNegative) {
  // Every contribution is negative, so a phantom zero keeps every candidate
  // from beating the seed.
  ScoreGrid g(3, 2);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t len = 1; len <= 2 && s + len <= 3; ++len) g.set(s, len, -1.0 - 0.1 * len, -2.0);
  }
  SegmentOptions lit;
  lit.literal_init = true;
  const auto a = segment_dp(g, 0.5);
  const auto b = segment_dp(g, 0.5, lit);
  EXPECT_NO_THROW(validate_segmentation(b.spans, 3, 2));
  EXPECT_EQ(b.objective, replay_objective(g, b.spans, 0.5));
  EXPECT_EQ(b.spans, sdtest::transcribe_segmentation(g, 0.5, true).spans);
  EXPECT_EQ(a.spans, sdtest::transcribe_segmentation(g, 0.5, false).spans);
}

TEST(SegmentDp, AllCompositionsOfTenIntoPartsUpToThree) {
  std::mt19937_64 rng(33);
  const auto g = sdtest::random_grid(rng, 10, 3);
  std::vector<std::vector<std::size_t>> all;
  std::vector<std::size_t> cur;
  sdtest::compositions(10, 3, cur, all);
  ASSERT_EQ(all.size(), 274u);

  const auto seg = segment_dp(g, 0.5);
  // Forward replay of every composition with the same running-sum rule.
  bool dp_cover_found = false;
  double best = -INFINITY;
  std::vector<SpanRef> best_spans;
  for (const auto& parts : all) {
    std::vector<SpanRef> spans;
    double sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t p : parts) {
      spans.push_back({static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(p)});
      sum += 0.5 * g.length_std(pos, p) + 0.5 * g.reliability_std(pos, p);
      pos += p;
    }
    const double avg = sum / static_cast<double>(parts.size());
    if (spans == seg.spans) {
      dp_cover_found = true;
      EXPECT_EQ(avg, seg.objective);
    }
    if (best < avg) {
      best = avg;
      best_spans = spans;
    }
  }
  EXPECT_TRUE(dp_cover_found);
  EXPECT_LE(seg.objective, best);
  const auto ex = segment_exhaustive(g, 0.5);
  EXPECT_EQ(ex.spans, best_spans);
  EXPECT_EQ(ex.objective, best);
  std::cout << "dp objective " << seg.objective << ", exhaustive optimum " << best
            << (seg.spans == best_spans ? " (same cover)" : " (different cover)") << "\n";
}

TEST(SegmentDp, InvariantsAndReplay) {
  std::mt19937_64 rng(34);
  std::size_t agree = 0, total = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + rng() % 14;
    const std::size_t n = 1 + rng() % 5;
    const auto g = sdtest::random_grid(rng, m, n);
    const double alpha = static_cast<double>(rng() % 9) * 0.125;
    const auto seg = segment_dp(g, alpha);
    EXPECT_NO_THROW(validate_segmentation(seg.spans, m, n));
    EXPECT_EQ(replay_objective(g, seg.spans, alpha), seg.objective);
    EXPECT_EQ(segment_dp(g, alpha), seg);
    const auto ex = segment_exhaustive(g, alpha);
    EXPECT_LE(seg.objective, ex.objective + 1e-12);
    ++total;
    agree += ex.spans == seg.spans;
  }
  RecordProperty("exhaustive_agreement", std::to_string(double(agree) / double(total)));
}

TEST(SegmentDp, Errors) {
  ScoreGrid g(3, 2);
  EXPECT_SD_ERROR(segment_dp(g, 1.5), ErrorCode::kInvalidArgument);
  EXPECT_SD_ERROR(segment_dp(g, 0.5), ErrorCode::kInvalidArgument);  // missing scores
  EXPECT_SD_ERROR(g.set(0, 1, NAN, 0), ErrorCode::kInvalidArgument);
  EXPECT_SD_ERROR(g.set(2, 2, 0, 0), ErrorCode::kInvalidArgument);
  EXPECT_SD_ERROR(segment_exhaustive(ScoreGrid(15, 2), 0.5), ErrorCode::kInvalidArgument);
  EXPECT_SD_ERROR(ScoreGrid(3, 0), ErrorCode::kInvalidArgument);
}

TEST(ValidateSegmentation, RejectsBadCovers) {
  const std::vector<SpanRef> gap{{0, 1}, {2, 1}}, overlap{{0, 2}, {1, 2}}, too_long{{0, 3}}, short_cover{{0, 2}};
  EXPECT_SD_ERROR(validate_segmentation(gap, 3, 3), ErrorCode::kInternal);
  EXPECT_SD_ERROR(validate_segmentation(overlap, 3, 3), ErrorCode::kInternal);
  EXPECT_SD_ERROR(validate_segmentation(too_long, 3, 2), ErrorCode::kInternal);
  EXPECT_SD_ERROR(validate_segmentation(short_cover, 3, 3), ErrorCode::kInternal);
}

TEST(AlphaGrid, NineValues) {
  const auto a = sweep_alpha_values();
  ASSERT_EQ(a.size(), 9u);
  EXPECT_EQ(a.front(), 0.0);
  EXPECT_EQ(a.back(), 1.0);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i] - a[i - 1], 0.125);
}

}  // namespace
