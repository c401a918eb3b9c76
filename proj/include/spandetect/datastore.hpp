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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spandetect/corpus.hpp"
#include "spandetect/embed.hpp"
#include "spandetect/tokenize.hpp"

namespace spandetect {

inline constexpr int kStoreFormatVersion = 1;

/// Where a stored span occurs in the training documents.
struct Occurrence {
  std::uint32_t doc = 0;  // index into the store's document table
  std::uint32_t start = 0;
  bool operator==(const Occurrence&) const = default;
};

/// A unique (surface, label, embedding) span of one length. Verbatim copies
/// that also share their embedding collapse into one record with several
/// occurrences; retrieval counts every occurrence separately.
struct RecordView {
  std::uint32_t length = 0;
  Label label = Label::kHuman;
  std::string_view surface;
  std::span<const float> embedding;
  std::span<const Occurrence> occurrences;

  std::size_t multiplicity() const noexcept { return occurrences.size(); }
};

/// One retrieved span occurrence.
struct Neighbor {
  std::uint32_t length = 0;
  std::uint32_t record = 0;
  std::uint32_t doc = 0;
  std::uint32_t start = 0;
  Label label = Label::kHuman;
  double similarity = 0.0;

  bool operator==(const Neighbor&) const = default;
};

enum class SearchMode { kStoreDefault, kExact, kApproximate };

struct KnnOptions {
  std::optional<std::string> exclude_doc;
  SearchMode mode = SearchMode::kStoreDefault;
  std::size_t ef_search = 0;  // 0: the store's configured value
};

/// Navigable-small-world graph parameters for the optional approximate mode.
struct ApproximateParams {
  bool enabled = false;
  std::size_t max_degree = 16;
  std::size_t ef_construction = 64;
  std::size_t ef_search = 96;
  std::size_t exact_below = 512;  // partitions smaller than this are always scanned

  nlohmann::json to_json() const;
  static ApproximateParams from_json(const nlohmann::json& j);
};

struct StoreMetadata {
  int version = kStoreFormatVersion;
  std::string fingerprint;  // content hash over metadata fields and every partition
  std::string embedder_fingerprint;
  EmbedderConfig embedder;
  TokenizerConfig tokenizer;
  std::size_t dim = 0;
  std::size_t n_max = 0;
  std::size_t k_default = 10;
  std::string corpus_id;
  ApproximateParams approximate;
};

/// Immutable per-length span index. Copies share the underlying data.
class SpanStore {
 public:
  class Builder;

  SpanStore() = default;

  static SpanStore load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  const StoreMetadata& metadata() const;
  const std::string& fingerprint() const { return metadata().fingerprint; }
  std::size_t dim() const { return metadata().dim; }
  std::size_t n_max() const { return metadata().n_max; }

  std::size_t partition_size(std::size_t length) const;  // unique records
  std::size_t occurrence_count(std::size_t length) const;
  std::size_t total_records() const;
  std::size_t total_occurrences() const;

  RecordView record(std::size_t length, std::uint32_t index) const;
  std::size_t document_count() const;
  const std::string& doc_id(std::uint32_t doc) const;

  /// The k best occurrences of length-`length` spans ordered by similarity
  /// descending, then doc_id, then start. Exact unless approximate search is
  /// enabled on the store or requested.
  std::vector<Neighbor> knn(std::span<const float> query, std::size_t length, std::size_t k,
                            const KnnOptions& options = {}) const;

  /// Builds (or rebuilds) the graph index used by approximate search.
  void enable_approximate(const ApproximateParams& params);

  explicit operator bool() const noexcept { return impl_ != nullptr; }

 private:
  struct Impl;
  explicit SpanStore(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  const Impl& impl() const;

  std::shared_ptr<Impl> impl_;
};

class SpanStore::Builder {
 public:
  Builder(std::size_t dim, std::size_t n_max);
  ~Builder();
  Builder(Builder&&) noexcept;
  Builder& operator=(Builder&&) noexcept;

  void add(std::string_view doc_id, SpanRef span, Label label, std::string_view surface,
           std::span<const float> embedding);

  /// Completes the store. `metadata.dim`, `n_max` and `fingerprint` are
  /// filled in by the builder.
  SpanStore finish(StoreMetadata metadata) &&;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct BuildOptions {
  std::size_t n_max = 20;
  std::size_t k_default = 10;
  ApproximateParams approximate;
  TokenizerConfig tokenizer;
  std::size_t threads = 0;
};

/// One record occurrence per enumerated span of every train document.
SpanStore build_store(const Corpus& corpus, const Embedder& embedder, const BuildOptions& options);

}  // namespace spandetect
