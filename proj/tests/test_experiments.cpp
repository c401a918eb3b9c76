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

#include <set>

#include "spandetect/error.hpp"
#include "spandetect/experiments.hpp"
#include "test_support.hpp"

namespace {

using namespace spandetect;

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new Corpus(sdtest::small_corpus(17, 24, 10, 10));
    emb_ = new ReferenceEmbedder(EmbedderConfig{});
    build_.n_max = 8;
    store_ = new SpanStore(build_store(*corpus_, *emb_, build_));
    options_.run_config = {{"k", 10}};
    cal_ = new Calibration(calibrate(*store_, *emb_, *corpus_, options_));
  }
  static void TearDownTestSuite() {
    delete cal_;
    delete store_;
    delete emb_;
    delete corpus_;
  }

  static inline Corpus* corpus_ = nullptr;
  static inline ReferenceEmbedder* emb_ = nullptr;
  static inline SpanStore* store_ = nullptr;
  static inline Calibration* cal_ = nullptr;
  static inline BuildOptions build_;
  static inline PipelineOptions options_;
};

TEST_F(Pipeline, CalibrationProvenance) {
  EXPECT_EQ(cal_->store_fingerprint, store_->fingerprint());
  EXPECT_EQ(cal_->stats.store_fingerprint, store_->fingerprint());
  EXPECT_EQ(cal_->stats.split, "validation");
  EXPECT_EQ(cal_->corpus_id, corpus_->subset(Split::kValidation).id());
  EXPECT_EQ(cal_->n_max, 8u);
  EXPECT_EQ(cal_->grid.size(), 9u);
  EXPECT_LE(cal_->validation_fpr, 0.01 + 1e-12);
  EXPECT_EQ(cal_->domain_epsilon.count("synthetic"), 1u);
}

TEST_F(Pipeline, NormStatsCoverEveryValidationSpan) {
  const Corpus val = corpus_->subset(Split::kValidation);
  std::size_t spans = 0;
  for (const auto& d : val.documents()) spans += span_count(tokenize(d).size(), 1, 8);
  EXPECT_EQ(cal_->stats.population, spans);
  const NormStats direct = fit_norm_stats(*store_, *corpus_, *emb_, 8, 10, 1);
  EXPECT_EQ(direct.to_json(), cal_->stats.to_json());
}

TEST_F(Pipeline, EvaluateReport) {
  const auto rep = evaluate(*store_, *emb_, *cal_, *corpus_, options_);
  EXPECT_EQ(rep.at("kind"), "evaluate");
  EXPECT_EQ(rep.at("config"), options_.run_config);
  EXPECT_EQ(rep.at("pooled").at("n_human"), 10);
  EXPECT_EQ(rep.at("pooled").at("n_llm"), 10);
  EXPECT_EQ(rep.at("examples").size(), 20u);
  ASSERT_EQ(rep.at("cells").size(), 1u);
  EXPECT_EQ(rep.at("cells")[0].at("generator"), "synth-lm");
  const double auroc = rep.at("pooled").at("auroc").get<double>();
  EXPECT_GE(auroc, 0.0);
  EXPECT_LE(auroc, 1.0);
  // Deterministic, independent of thread count.
  PipelineOptions one = options_;
  one.threads = 1;
  EXPECT_EQ(evaluate(*store_, *emb_, *cal_, *corpus_, one).dump(), rep.dump());
}

TEST_F(Pipeline, SweepAlphaHasNinePoints) {
  const auto rep = sweep_alpha(*store_, *emb_, *cal_, *corpus_, options_);
  ASSERT_EQ(rep.at("points").size(), 9u);
  const auto grid = sweep_alpha_values();
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(rep.at("points")[i].at("alpha").get<double>(), grid[i]);
  // The calibrated alpha's point reproduces the pooled evaluation.
  const auto ev = evaluate(*store_, *emb_, *cal_, *corpus_, options_);
  for (const auto& p : rep.at("points")) {
    if (p.at("alpha").get<double>() == cal_->alpha) EXPECT_EQ(p.at("test"), ev.at("pooled"));
  }
}

TEST_F(Pipeline, ForeignCalibrationRejected) {
  Calibration other = *cal_;
  other.store_fingerprint = "ffffffffffffffff";
  EXPECT_SD_ERROR(evaluate(*store_, *emb_, other, *corpus_, options_), ErrorCode::kMismatch);
}

TEST_F(Pipeline, SweepSizeReproducesFullStoreAtIdentity) {
  const auto rep = sweep_datastore_size(*corpus_, *emb_, {12, 24}, 5, build_, options_);
  ASSERT_EQ(rep.at("points").size(), 2u);
  const auto& full = rep.at("points")[1];
  EXPECT_EQ(full.at("store_fingerprint"), store_->fingerprint());
  const auto ev = evaluate(*store_, *emb_, *cal_, *corpus_, options_);
  EXPECT_EQ(full.at("pooled"), ev.at("pooled"));
  EXPECT_EQ(full.at("calibration").at("alpha").get<double>(), cal_->alpha);
  EXPECT_LT(rep.at("points")[0].at("records").get<std::size_t>(), full.at("records").get<std::size_t>());
  EXPECT_SD_ERROR(sweep_datastore_size(*corpus_, *emb_, {25}, 5, build_, options_), ErrorCode::kInvalidArgument);
}

TEST(SampleTrainPairs, NestedAndOrderPreserving) {
  const Corpus c = sdtest::small_corpus(3, 20, 4, 4);
  const Corpus small = sample_train_pairs(c, 5, 9);
  const Corpus big = sample_train_pairs(c, 12, 9);
  EXPECT_EQ(small.count(Split::kTrain, Label::kHuman), 5u);
  EXPECT_EQ(small.count(Split::kTrain, Label::kLlm), 5u);
  EXPECT_EQ(small.count(Split::kValidation), 8u);
  EXPECT_EQ(small.count(Split::kTest), 8u);
  std::set<std::string> in_big;
  for (const auto& d : big.documents()) in_big.insert(d.doc_id);
  for (const auto& d : small.documents()) EXPECT_TRUE(in_big.count(d.doc_id)) << d.doc_id;
  // Relative order follows the source corpus.
  std::size_t pos = 0;
  for (const auto& d : small.documents()) {
    while (pos < c.size() && c.documents()[pos].doc_id != d.doc_id) ++pos;
    ASSERT_LT(pos, c.size());
  }
  EXPECT_EQ(sample_train_pairs(c, 20, 9), c);
  EXPECT_EQ(sample_train_pairs(c, 5, 9), small);
  EXPECT_NE(sample_train_pairs(c, 5, 10), small);
  EXPECT_SD_ERROR(sample_train_pairs(c, 21, 9), ErrorCode::kInvalidArgument);
  EXPECT_SD_ERROR(sample_train_pairs(c, 0, 9), ErrorCode::kInvalidArgument);
}

TEST(Calibrate, NeedsValidationSplit) {
  ReferenceEmbedder emb(EmbedderConfig{});
  const Corpus c({sdtest::doc("a", "one two", Label::kHuman), sdtest::doc("b", "three four", Label::kLlm)});
  const SpanStore s = build_store(c, emb, {});
  EXPECT_SD_ERROR(calibrate(s, emb, c, {}), ErrorCode::kInvalidArgument);
}

}  // namespace
