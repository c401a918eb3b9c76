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

#include <cmath>
#include <random>

#include "spandetect/error.hpp"
#include "spandetect/score.hpp"
#include "spandetect/tokenize.hpp"
#include "test_support.hpp"

namespace {

using namespace spandetect;

std::vector<Neighbor> neighbors(const std::vector<std::pair<Label, double>>& rows) {
  std::vector<Neighbor> out;
  std::uint32_t i = 0;
  for (const auto& [label, sim] : rows) {
    Neighbor n;
    n.length = 3;
    n.doc = i;
    n.record = i++;
    n.label = label;
    n.similarity = sim;
    out.push_back(n);
  }
  return out;
}

constexpr Label L = Label::kLlm;
constexpr Label H = Label::kHuman;

// Ten retrieved spans: eight labelled LLM, two Human, similarities as listed.
const std::vector<std::pair<Label, double>> kTableRows = {{L, 0.92}, {L, 0.92}, {H, 0.90}, {L, 0.90}, {L, 0.90},
                                                          {L, 0.90}, {L, 0.89}, {H, 0.89}, {L, 0.89}, {L, 0.89}};

TEST(SpanScores, EightOfTenLlm) {
  const auto s = score_from_neighbors({4, 3}, neighbors(kTableRows));
  EXPECT_DOUBLE_EQ(s.prediction, 0.8);
  EXPECT_EQ(s.llm_count, 8u);
  EXPECT_EQ(s.k_effective(), 10u);
}

TEST(SpanScores, ReliabilityIsMeanSimilarity) {
  const auto s = score_from_neighbors({4, 3}, neighbors(kTableRows));
  EXPECT_NEAR(s.reliability, 0.900, 1e-12);
  EXPECT_EQ(s.length, 3u);
  EXPECT_FALSE(s.no_evidence);
}

TEST(SpanScores, AllHuman) {
  const auto s = score_from_neighbors({0, 1}, neighbors({{H, 0.5}, {H, 0.4}, {H, 0.3}}));
  EXPECT_EQ(s.prediction, 0.0);
}

TEST(SpanScores, FewerThanKUsesRealizedCount) {
  const auto s = score_from_neighbors({0, 2}, neighbors({{L, 0.6}, {H, 0.2}}));
  EXPECT_DOUBLE_EQ(s.prediction, 0.5);
  EXPECT_DOUBLE_EQ(s.reliability, 0.4);
}

TEST(SpanScores, NoEvidenceIsNeutral) {
  const auto s = score_from_neighbors({0, 5}, {});
  EXPECT_EQ(s.prediction, 0.5);
  EXPECT_EQ(s.reliability, 0.0);
  EXPECT_TRUE(s.no_evidence);
  EXPECT_EQ(s.length, 5u);
}

TEST(SpanScores, Properties) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<Label, double>> rows;
    const std::size_t k = 1 + rng() % 12;
    for (std::size_t i = 0; i < k; ++i) rows.push_back({rng() % 2 ? L : H, u(rng)});
    const auto s = score_from_neighbors({0, 1}, neighbors(rows));
    EXPECT_GE(s.prediction, 0.0);
    EXPECT_LE(s.prediction, 1.0);
    // Positive rescaling of similarities leaves P unchanged.
    auto scaled = rows;
    for (auto& r : scaled) r.second *= 0.37;
    EXPECT_EQ(score_from_neighbors({0, 1}, neighbors(scaled)).prediction, s.prediction);
    // Raising one similarity never lowers R.
    auto raised = rows;
    raised[rng() % k].second += 0.1;
    EXPECT_GE(score_from_neighbors({0, 1}, neighbors(raised)).reliability, s.reliability);
  }
}

TEST(NormStats, ConstantLengthsAreDegenerate) {
  const std::vector<double> l{3, 3, 3, 3}, r{0.1, 0.2, 0.3, 0.4};
  const auto s = fit_norm_stats(l, r);
  EXPECT_TRUE(s.length_degenerate);
  EXPECT_EQ(s.std_length, 1.0);
  EXPECT_EQ(s.mean_length, 3.0);
  EXPECT_FALSE(s.reliability_degenerate);
}

TEST(NormStats, PopulationMoments) {
  const std::vector<double> l{1, 3, 1, 3}, r{0.5, 0.5, 0.7, 0.7};
  const auto s = fit_norm_stats(l, r);
  EXPECT_DOUBLE_EQ(s.mean_length, 2.0);
  EXPECT_DOUBLE_EQ(s.std_length, 1.0);
  EXPECT_NEAR(s.mean_reliability, 0.6, 1e-15);
  EXPECT_NEAR(s.std_reliability, 0.1, 1e-15);
  EXPECT_EQ(s.population, 4u);
  const auto again = fit_norm_stats(l, r);
  EXPECT_EQ(again.to_json(), s.to_json());
}

TEST(NormStats, EmptyRejected) {
  EXPECT_SD_ERROR(fit_norm_stats(std::vector<double>{}, std::vector<double>{}), ErrorCode::kInvalidArgument);
}

TEST(NormStats, JsonRoundTripAndValidation) {
  NormStats s;
  s.mean_length = 5.5;
  s.std_length = 2.25;
  s.mean_reliability = 0.4;
  s.std_reliability = 0.125;
  s.corpus_id = "c";
  const auto back = NormStats::from_json(s.to_json());
  EXPECT_EQ(back.mean_length, 5.5);
  EXPECT_EQ(back.std_reliability, 0.125);
  auto bad = s.to_json();
  bad["std_length"] = 0.0;
  EXPECT_SD_ERROR(NormStats::from_json(bad), ErrorCode::kParse);
}

TEST(Standardize, Examples) {
  NormStats st;
  st.mean_length = 4.0;
  st.std_length = 2.0;
  st.mean_reliability = 0.5;
  st.std_reliability = 0.1;
  SpanScores s;
  s.length = 4;
  s.reliability = 0.6;
  const auto z = standardize(s, st);
  EXPECT_EQ(z.length_std, 0.0);
  EXPECT_NEAR(z.reliability_std, 1.0, 1e-12);
  // Flagged std of 1 only centers.
  st.std_length = 1.0;
  st.length_degenerate = true;
  s.length = 7;
  EXPECT_EQ(standardize(s, st).length_std, 3.0);
}

TEST(Standardize, FittingPopulationHasZeroMeanUnitStd) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SpanScores> cells;
  std::vector<double> l, r;
  for (int i = 0; i < 5000; ++i) {
    SpanScores s;
    s.length = 1 + rng() % 20;
    s.reliability = u(rng) * u(rng);
    l.push_back(static_cast<double>(s.length));
    r.push_back(s.reliability);
    cells.push_back(s);
  }
  const auto st = fit_norm_stats(l, r);
  double ml = 0, mr = 0, vl = 0, vr = 0;
  for (auto& c : cells) {
    c = standardize(c, st);
    ml += c.length_std;
    mr += c.reliability_std;
  }
  ml /= cells.size();
  mr /= cells.size();
  for (const auto& c : cells) {
    vl += (c.length_std - ml) * (c.length_std - ml);
    vr += (c.reliability_std - mr) * (c.reliability_std - mr);
  }
  EXPECT_NEAR(ml, 0.0, 1e-6);
  EXPECT_NEAR(mr, 0.0, 1e-6);
  EXPECT_NEAR(std::sqrt(vl / cells.size()), 1.0, 1e-6);
  EXPECT_NEAR(std::sqrt(vr / cells.size()), 1.0, 1e-6);
}

TEST(SpanTable, CoversEveryCandidate) {
  SpanTable t(5, 3);
  EXPECT_EQ(t.size(), span_count(5, 1, 3));
  EXPECT_EQ(t.at(4, 1).span, (SpanRef{4, 1}));
  EXPECT_EQ(t.at(2, 3).length, 3u);
  EXPECT_FALSE(t.contains(3, 3));
  EXPECT_SD_ERROR(t.at(3, 3), ErrorCode::kInvalidArgument);
}

TEST(ScoreAllSpans, UsesStoreNeighbours) {
  ReferenceEmbedder emb(EmbedderConfig{});
  const Corpus c({sdtest::doc("a", "red green blue", Label::kLlm), sdtest::doc("b", "cyan magenta", Label::kHuman)});
  BuildOptions opt;
  opt.n_max = 3;
  const SpanStore store = build_store(c, emb, opt);
  const auto q = tokenize("q", "red green blue");
  const auto table = score_all_spans(store, emb.embed(q), 3, 2);
  EXPECT_EQ(table.size(), 6u);
  const auto& full = table.at(0, 3);
  ASSERT_EQ(full.k_effective(), 1u);  // the length-3 partition holds one span
  EXPECT_DOUBLE_EQ(full.reliability, 1.0);
  EXPECT_EQ(full.prediction, 1.0);
  EXPECT_SD_ERROR(score_all_spans(store, emb.embed(q), 4, 2), ErrorCode::kInvalidArgument);
}

}  // namespace
