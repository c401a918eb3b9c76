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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spandetect {

enum class Label : std::uint8_t { kHuman = 0, kLlm = 1 };
enum class Split : std::uint8_t { kTrain = 0, kValidation = 1, kTest = 2 };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Split split) noexcept;
Label parse_label(std::string_view text);  // "human" | "llm"
Split parse_split(std::string_view text);  // "train" | "validation" | "test"

struct Document {
  std::string doc_id;
  std::string text;
  Label label = Label::kHuman;
  std::string domain;
  std::string generator;  // empty for human-written documents
  Split split = Split::kTrain;

  bool operator==(const Document&) const = default;
};

/// An ordered, validated collection of documents. Construction enforces the
/// document invariants (unique ids, non-blank text, no generator on human
/// documents).
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }

  std::size_t count(Split split, Label label) const;
  std::size_t count(Split split) const;

  /// Documents of one split, in corpus order.
  Corpus subset(Split split) const;

  /// Content hash over the serialized records.
  std::string id() const;

  bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

 private:
  std::vector<Document> documents_;
};

/// Line-delimited JSON records; `source` names the input in error messages.
Corpus parse_corpus(std::istream& in, std::string_view source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Knobs for the synthetic corpus generator.
struct VocabProfile {
  std::size_t machine_phrases = 32;  // pool reused by LLM documents
  std::size_t human_phrases = 96;    // larger, more varied pool for human documents
  std::size_t min_phrase_len = 3;
  std::size_t max_phrase_len = 7;
  std::size_t min_tokens = 26;  // approximate document length in words
  std::size_t max_tokens = 38;
  double llm_phrase_rate = 0.7;    // share of an LLM document drawn from machine phrases
  double human_phrase_rate = 0.5;  // share of a human document drawn from human phrases
  double cross_rate = 0.08;        // chance a planted phrase comes from the other pool
  std::string domain = "synthetic";
  std::string generator = "synth-lm";
};

/// Deterministic label-balanced corpus: `pairs_per_split[s]` human and the
/// same number of LLM documents per split.
Corpus synthesize_corpus(std::uint64_t seed,
                         const std::map<Split, std::size_t>& pairs_per_split,
                         const VocabProfile& profile = {});

}  // namespace spandetect
