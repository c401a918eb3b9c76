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


// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <string>

#include <json.hpp>

#include "spandetect/spandetect.h"

namespace {

using nlohmann::json;

std::string take(char* s) {
  std::string out = s ? s : "";
  sd_string_free(s);
  return out;
}

class CApi : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::filesystem::temp_directory_path() / ("spandetect-capi-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
    corpus_ = (dir_ / "c.jsonl").string();
    store_ = (dir_ / "store").string();
    cal_ = (dir_ / "cal.json").string();
    ASSERT_EQ(sd_synthesize_corpus(R"({"seed":5,"train":8,"validation":4,"test":4})", corpus_.c_str()), SD_OK)
        << sd_last_error();
    char* fp = nullptr;
    ASSERT_EQ(sd_build_store(corpus_.c_str(), store_.c_str(), R"({"n_max":5})", &fp), SD_OK) << sd_last_error();
    fingerprint_ = take(fp);
    char* out = nullptr;
    ASSERT_EQ(sd_calibrate(store_.c_str(), corpus_.c_str(), cal_.c_str(), "{}", &out), SD_OK) << sd_last_error();
    sd_string_free(out);
  }
  static void TearDownTestSuite() { std::filesystem::remove_all(dir_); }

  static inline std::filesystem::path dir_;
  static inline std::string corpus_, store_, cal_, fingerprint_;
};

TEST_F(CApi, CorpusAndStoreInfo) {
  char* out = nullptr;
  ASSERT_EQ(sd_corpus_summary(corpus_.c_str(), &out), SD_OK);
  const auto c = json::parse(take(out));
  EXPECT_EQ(c.at("documents"), 32);
  EXPECT_EQ(c.at("splits").at("train").at("llm"), 8);
  ASSERT_EQ(sd_store_info(store_.c_str(), &out), SD_OK);
  const auto s = json::parse(take(out));
  EXPECT_EQ(s.at("fingerprint"), fingerprint_);
  EXPECT_EQ(s.at("n_max"), 5);
  EXPECT_EQ(s.at("documents"), 16);
}

TEST_F(CApi, EngineDetect) {
  sd_engine* engine = nullptr;
  ASSERT_EQ(sd_engine_open(store_.c_str(), cal_.c_str(), nullptr, &engine), SD_OK) << sd_last_error();
  char* out = nullptr;
  ASSERT_EQ(sd_engine_detect(engine, "a short sentence to check.", R"({"k":2})", &out), SD_OK) << sd_last_error();
  const auto ev = json::parse(take(out));
  EXPECT_EQ(ev.at("k"), 2);
  EXPECT_EQ(ev.at("store_fingerprint"), fingerprint_);
  EXPECT_FALSE(ev.at("spans").empty());
  ASSERT_EQ(sd_engine_info(engine, &out), SD_OK);
  EXPECT_EQ(json::parse(take(out)).at("status"), "ok");
  EXPECT_EQ(sd_engine_detect(engine, "   ", nullptr, &out), SD_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(sd_last_error()).find("empty"), std::string::npos);
  EXPECT_EQ(sd_engine_detect(engine, "x", "{bad", &out), SD_ERR_PARSE);
  sd_engine_close(engine);
}

TEST_F(CApi, ReportsAreJson) {
  char* out = nullptr;
  ASSERT_EQ(sd_evaluate(store_.c_str(), cal_.c_str(), corpus_.c_str(), "{}", &out), SD_OK) << sd_last_error();
  const std::string first = take(out);
  EXPECT_EQ(json::parse(first).at("kind"), "evaluate");
  ASSERT_EQ(sd_evaluate(store_.c_str(), cal_.c_str(), corpus_.c_str(), "{}", &out), SD_OK);
  EXPECT_EQ(take(out), first);
  ASSERT_EQ(sd_sweep_alpha(store_.c_str(), cal_.c_str(), corpus_.c_str(), "{}", &out), SD_OK) << sd_last_error();
  EXPECT_EQ(json::parse(take(out)).at("points").size(), 9u);
  ASSERT_EQ(sd_sweep_size(corpus_.c_str(), R"({"sizes":[4,8],"seed":1,"build":{"n_max":5}})", &out), SD_OK)
      << sd_last_error();
  const auto sweep = json::parse(take(out));
  EXPECT_EQ(sweep.at("points")[1].at("store_fingerprint"), fingerprint_);
}

TEST_F(CApi, Errors) {
  sd_engine* engine = reinterpret_cast<sd_engine*>(1);
  EXPECT_EQ(sd_engine_open("/nonexistent", cal_.c_str(), nullptr, &engine), SD_ERR_IO);
  EXPECT_EQ(engine, nullptr);
  EXPECT_NE(std::string(sd_last_error()).find("/nonexistent"), std::string::npos);
  EXPECT_EQ(sd_engine_open(nullptr, cal_.c_str(), nullptr, &engine), SD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sd_engine_detect(nullptr, "x", nullptr, nullptr), SD_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sd_build_store(corpus_.c_str(), (dir_ / "s2").string().c_str(), "[1,2]", nullptr), SD_ERR_PARSE);
  EXPECT_EQ(sd_build_store(corpus_.c_str(), (dir_ / "s2").string().c_str(),
                           R"({"embedder":{"kind":"remote","endpoint":"http://127.0.0.1:1/embed","timeout_seconds":1}})",
                           nullptr),
            SD_ERR_BACKEND_UNAVAILABLE);
  EXPECT_STREQ(sd_status_name(SD_OK), "ok");
  EXPECT_STRNE(sd_status_name(SD_ERR_MISMATCH), "unknown");
  EXPECT_STREQ(sd_version(), "0.1.0");
  char* out = nullptr;
  ASSERT_EQ(sd_corpus_summary(corpus_.c_str(), &out), SD_OK);
  sd_string_free(out);
  EXPECT_STREQ(sd_last_error(), "");
  sd_string_free(nullptr);
  sd_engine_close(nullptr);
}

}  // namespace
