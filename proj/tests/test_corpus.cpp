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

#include <sstream>

#include "spandetect/corpus.hpp"
#include "spandetect/error.hpp"
#include "test_support.hpp"

namespace {

using namespace spandetect;

const char* kTwoLines =
    R"({"doc_id":"a","text":"The cat sat.","label":"human","split":"train","domain":"news"})"
    "\n"
    R"({"doc_id":"b","text":"A model wrote this.","label":"llm","split":"test","domain":"news","generator":"g1"})"
    "\n";

std::string error_of(const std::string& jsonl) {
  std::istringstream in(jsonl);
  try {
    parse_corpus(in, "fixture.jsonl");
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kParse || e.code() == ErrorCode::kInvalidArgument);
    return e.what();
  }
  ADD_FAILURE() << "no error raised";
  return {};
}

TEST(CorpusLoad, TwoValidLines) {
  std::istringstream in(kTwoLines);
  const Corpus c = parse_corpus(in);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.documents()[0].doc_id, "a");
  EXPECT_EQ(c.documents()[1].label, Label::kLlm);
  EXPECT_EQ(c.documents()[1].generator, "g1");
  EXPECT_EQ(c.count(Split::kTest, Label::kLlm), 1u);
}

TEST(CorpusLoad, BlankLinesSkipped) {
  std::istringstream in(std::string("\n") + kTwoLines + "\n  \n");
  EXPECT_EQ(parse_corpus(in).size(), 2u);
}

TEST(CorpusLoad, DuplicateIdNamed) {
  const std::string msg = error_of(R"({"doc_id":"a","text":"x","label":"human","split":"train"})"
                                   "\n"
                                   R"({"doc_id":"a","text":"y","label":"human","split":"train"})");
  EXPECT_NE(msg.find("\"a\""), std::string::npos) << msg;
  EXPECT_NE(msg.find(":2"), std::string::npos) << msg;
}

TEST(CorpusLoad, BadLabelNamesLineAndValue) {
  const std::string msg = error_of(R"({"doc_id":"a","text":"x","label":"human","split":"train"})"
                                   "\n"
                                   R"({"doc_id":"b","text":"y","label":"robot","split":"train"})");
  EXPECT_NE(msg.find("fixture.jsonl:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("robot"), std::string::npos) << msg;
}

TEST(CorpusLoad, OtherViolations) {
  EXPECT_NE(error_of("{not json").find("fixture.jsonl:1"), std::string::npos);
  EXPECT_NE(error_of(R"({"doc_id":"a","label":"human","split":"train"})").find("text"), std::string::npos);
  EXPECT_NE(error_of(R"({"doc_id":"a","text":"   ","label":"human","split":"train"})").find("text"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"doc_id":"a","text":"x","label":"human","split":"dev"})").find("dev"), std::string::npos);
  EXPECT_FALSE(error_of(R"({"doc_id":"a","text":"x","label":"human","split":"train","generator":"g"})").empty());
}

TEST(CorpusLoad, MissingFileIsIoError) {
  EXPECT_SD_ERROR(load_corpus("/nonexistent/corpus.jsonl"), ErrorCode::kIo);
}

TEST(CorpusRoundTrip, WriteThenLoad) {
  sdtest::TempDir dir;
  const Corpus c = sdtest::small_corpus(3, 5, 2, 2);
  save_corpus(c, dir / "c.jsonl");
  const Corpus back = load_corpus(dir / "c.jsonl");
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.id(), c.id());
  // Unicode and escapes survive.
  const Corpus u({sdtest::doc("u", "caf\xc3\xa9 \"quoted\"\tline\nbreak", Label::kHuman)});
  save_corpus(u, dir / "u.jsonl");
  EXPECT_EQ(load_corpus(dir / "u.jsonl"), u);
}

TEST(CorpusSubset, KeepsOrderAndSplit) {
  const Corpus c = sdtest::small_corpus(1, 4, 3, 2);
  const Corpus v = c.subset(Split::kValidation);
  EXPECT_EQ(v.size(), 6u);
  for (const auto& d : v.documents()) EXPECT_EQ(d.split, Split::kValidation);
}

TEST(Synth, CountsAndBalance) {
  const Corpus c = sdtest::small_corpus(7, 50, 20, 20);
  EXPECT_EQ(c.size(), 180u);
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    EXPECT_EQ(c.count(s, Label::kHuman), c.count(s, Label::kLlm));
  }
  EXPECT_EQ(c.count(Split::kTrain), 100u);
  EXPECT_EQ(c.count(Split::kValidation), 40u);
}

TEST(Synth, Deterministic) {
  sdtest::TempDir dir;
  save_corpus(sdtest::small_corpus(7, 10, 4, 4), dir / "a.jsonl");
  save_corpus(sdtest::small_corpus(7, 10, 4, 4), dir / "b.jsonl");
  EXPECT_EQ(sdtest::read_file(dir / "a.jsonl"), sdtest::read_file(dir / "b.jsonl"));
}

TEST(Synth, SeedSensitive) {
  const Corpus a = sdtest::small_corpus(7, 10, 4, 4);
  const Corpus b = sdtest::small_corpus(8, 10, 4, 4);
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differing += a.documents()[i].text != b.documents()[i].text;
  EXPECT_GT(differing, a.size() / 2);
}

TEST(Synth, HumanDocumentsHaveNoGenerator) {
  for (const auto& d : sdtest::small_corpus(2, 6, 2, 2).documents()) {
    EXPECT_EQ(d.generator.empty(), d.label == Label::kHuman);
  }
}

}  // namespace
