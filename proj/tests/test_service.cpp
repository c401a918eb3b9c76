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

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "spandetect/engine.hpp"
#include "spandetect/error.hpp"
#include "spandetect/experiments.hpp"
#include "spandetect/service.hpp"
#include "test_support.hpp"

namespace {

using namespace spandetect;
using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new sdtest::TempDir();
    const Corpus corpus = sdtest::small_corpus(23, 10, 4, 4);
    save_corpus(corpus, *dir_ / "c.jsonl");
    ReferenceEmbedder emb(EmbedderConfig{});
    BuildOptions b;
    b.n_max = 6;
    const SpanStore store = build_store(corpus, emb, b);
    store.save(*dir_ / "store");
    save_calibration(calibrate(store, emb, corpus, {}), (*dir_ / "cal.json").string());
    engine_ = Engine::open(*dir_ / "store", *dir_ / "cal.json").release();
    llm_text_ = corpus.documents()[1].text;
  }
  static void TearDownTestSuite() {
    delete engine_;
    delete dir_;
  }

  static HttpReply post(const json& body, const ServiceOptions& opt = {}) {
    return handle_detect(*engine_, body.dump(), opt);
  }

  static inline sdtest::TempDir* dir_ = nullptr;
  static inline Engine* engine_ = nullptr;
  static inline std::string llm_text_;
};

TEST_F(ServiceTest, ValidRequestTilesText) {
  const auto r = post({{"text", "the quick report describes the results."}});
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  ASSERT_FALSE(j.at("spans").empty());
  const auto doc = tokenize("x", "the quick report describes the results.");
  std::size_t next = 0;
  for (const auto& s : j.at("spans")) {
    EXPECT_EQ(s.at("start").get<std::size_t>(), next);
    next += s.at("len").get<std::size_t>();
  }
  EXPECT_EQ(next, doc.size());
  EXPECT_TRUE(r.headers.count("X-Elapsed-Ms"));
}

TEST_F(ServiceTest, TrainLlmDocumentIsLlm) {
  const auto j = json::parse(post({{"text", llm_text_}}).body);
  EXPECT_EQ(j.at("label"), "llm");
}

TEST_F(ServiceTest, ByteIdenticalAcrossRequests) {
  const auto a = post({{"text", llm_text_}});
  const auto b = post({{"text", llm_text_}});
  EXPECT_EQ(a.body, b.body);
}

TEST_F(ServiceTest, BadRequests) {
  EXPECT_EQ(post({{"text", ""}}).status, 400);
  EXPECT_EQ(post({{"text", "  \n "}}).status, 400);
  EXPECT_EQ(post({{"txt", "x"}}).status, 400);
  EXPECT_EQ(handle_detect(*engine_, "{not json", {}).status, 400);
  EXPECT_EQ(handle_detect(*engine_, "[1]", {}).status, 400);
  ServiceOptions small;
  small.max_text_chars = 5;
  EXPECT_EQ(post({{"text", "six chars!"}}, small).status, 400);
  // five code points, more bytes
  EXPECT_EQ(post({{"text", "caf\xc3\xa9s"}}, small).status, 200);
}

TEST_F(ServiceTest, OutOfPolicyOverridesNameBounds) {
  const auto r = post({{"text", "hello world"}, {"alpha", 1.5}});
  EXPECT_EQ(r.status, 422);
  EXPECT_NE(r.body.find("[0, 1]"), std::string::npos) << r.body;
  const auto k = post({{"text", "hello world"}, {"k", 0}});
  EXPECT_EQ(k.status, 422);
  EXPECT_NE(k.body.find("[1, 100]"), std::string::npos) << k.body;
  EXPECT_EQ(post({{"text", "hello world"}, {"k", 101}}).status, 422);
  EXPECT_EQ(post({{"text", "hello world"}, {"k", 2.5}}).status, 422);
  EXPECT_EQ(post({{"text", "hello world"}, {"epsilon", -0.1}}).status, 422);
  EXPECT_EQ(post({{"text", "hello world"}, {"alpha", "high"}}).status, 422);
}

TEST_F(ServiceTest, OverridesApplied) {
  const auto j = json::parse(post({{"text", "hello world"}, {"alpha", 0.25}, {"k", 3}, {"epsilon", 0.9}}).body);
  EXPECT_EQ(j.at("alpha"), 0.25);
  EXPECT_EQ(j.at("k"), 3);
  EXPECT_EQ(j.at("threshold"), 0.9);
  for (const auto& s : j.at("spans")) EXPECT_LE(s.at("neighbors").size(), 3u);
}

TEST_F(ServiceTest, Health) {
  const auto r = handle_health(*engine_, 1.5);
  ASSERT_EQ(r.status, 200);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j.at("status"), "ok");
  EXPECT_EQ(j.at("store_fingerprint"), engine_->store().fingerprint());
  EXPECT_EQ(j.at("uptime_s"), 1.5);
  EXPECT_TRUE(j.at("calibration").contains("alpha"));
}

TEST_F(ServiceTest, LiveSocket) {
  ServiceOptions opt;
  opt.port = 0;
  opt.cors = true;
  Service svc(*engine_, opt);
  const int port = svc.bind();
  std::thread t([&] { svc.run(); });
  httplib::Client cli("127.0.0.1", port);
  std::vector<std::string> bodies(4);
  std::vector<std::thread> clients;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    clients.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      auto res = c.Post("/api/detect", json{{"text", llm_text_}}.dump(), "application/json");
      if (res && res->status == 200) bodies[i] = res->body;
    });
  }
  for (auto& c : clients) c.join();
  for (const auto& b : bodies) EXPECT_EQ(b, bodies[0]);
  EXPECT_FALSE(bodies[0].empty());

  auto health = cli.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");
  auto empty = cli.Post("/api/detect", R"({"text":""})", "application/json");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 400);
  svc.stop();
  t.join();
}

TEST_F(ServiceTest, EngineRejectsForeignCalibration) {
  auto cal = load_calibration((*dir_ / "cal.json").string());
  cal.store_fingerprint = "0000000000000000";
  save_calibration(cal, (*dir_ / "foreign.json").string());
  EXPECT_SD_ERROR(Engine::open(*dir_ / "store", *dir_ / "foreign.json"), ErrorCode::kMismatch);
}

// Claims the store's embedder identity but cannot reach its backend.
class DownEmbedder final : public Embedder {
 public:
  explicit DownEmbedder(const Embedder& like) : fp_(like.fingerprint()), cfg_(like.config()) {}
  std::size_t dim() const override { return cfg_.dim; }
  std::string fingerprint() const override { return fp_; }
  const EmbedderConfig& config() const override { return cfg_; }
  TokenVectors embed(const TokenizedDoc&) const override {
    fail(ErrorCode::kBackendUnavailable, "embedding service unreachable");
  }

 private:
  std::string fp_;
  EmbedderConfig cfg_;
};

TEST_F(ServiceTest, BackendDownIs503) {
  const Engine down(engine_->store(), std::make_unique<DownEmbedder>(engine_->embedder()), engine_->calibration());
  const auto r = handle_detect(down, json{{"text", "hello"}}.dump(), {});
  EXPECT_EQ(r.status, 503);
  EXPECT_NE(r.body.find("unreachable"), std::string::npos);
}

TEST(Utf8Length, CountsCodePoints) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("caf\xc3\xa9"), 4u);
  EXPECT_EQ(utf8_length("\xe2\x80\x9c\xf0\x9f\x98\x80"), 2u);
}

}  // namespace
