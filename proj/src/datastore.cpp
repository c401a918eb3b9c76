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

#include "spandetect/datastore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <unordered_map>

#include "nsw_index.hpp"
#include "spandetect/error.hpp"
#include "spandetect/util.hpp"

namespace spandetect {
namespace {

constexpr char kPartitionMagic[8] = {'S', 'D', 'P', 'A', 'R', 'T', '0', '1'};
constexpr const char* kMetadataFile = "metadata.json";

std::string partition_file(std::size_t length) {
  char name[48];
  std::snprintf(name, sizeof name, "spans_len_%02zu.bin", length);
  return name;
}

// Little-endian writers/readers, independent of host byte order.
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string name) : data_(data), name_(std::move(name)) {}

  std::uint64_t uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail(ErrorCode::kParse, name_ + ": truncated partition file");
  }
  std::string_view data_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

nlohmann::json ApproximateParams::to_json() const {
  return {{"enabled", enabled},
          {"max_degree", max_degree},
          {"ef_construction", ef_construction},
          {"ef_search", ef_search},
          {"exact_below", exact_below}};
}

ApproximateParams ApproximateParams::from_json(const nlohmann::json& j) {
  ApproximateParams p;
  p.enabled = j.value("enabled", p.enabled);
  p.max_degree = j.value("max_degree", p.max_degree);
  p.ef_construction = j.value("ef_construction", p.ef_construction);
  p.ef_search = j.value("ef_search", p.ef_search);
  p.exact_below = j.value("exact_below", p.exact_below);
  return p;
}

namespace detail {

struct Partition {
  std::uint32_t length = 0;
  std::size_t dim = 0;
  std::vector<Label> labels;
  std::vector<std::uint32_t> occ_offsets{0};
  std::vector<Occurrence> occurrences;
  std::vector<std::uint32_t> surface_offsets{0};
  std::string surfaces;
  std::vector<float> embeddings;
  std::vector<double> norms;

  std::size_t size() const noexcept { return labels.size(); }
  VectorTable table() const { return {embeddings, norms, dim}; }

  void compute_norms() {
    norms.resize(size());
    for (std::size_t r = 0; r < size(); ++r) {
      double ss = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = embeddings[r * dim + d];
        ss += v * v;
      }
      norms[r] = std::sqrt(ss);
    }
  }

  std::string serialize() const {
    std::string out(kPartitionMagic, sizeof kPartitionMagic);
    put_u32(out, length);
    put_u32(out, static_cast<std::uint32_t>(dim));
    put_u64(out, size());
    put_u64(out, occurrences.size());
    put_u64(out, surfaces.size());
    for (Label l : labels) out.push_back(static_cast<char>(l));
    for (auto o : occ_offsets) put_u32(out, o);
    for (const auto& o : occurrences) {
      put_u32(out, o.doc);
      put_u32(out, o.start);
    }
    for (auto o : surface_offsets) put_u32(out, o);
    out += surfaces;
    for (float f : embeddings) put_f32(out, f);
    return out;
  }

  static Partition parse(std::string_view bytes, const std::string& name, std::size_t doc_count) {
    ByteReader in(bytes, name);
    if (in.bytes(sizeof kPartitionMagic) != std::string_view(kPartitionMagic, sizeof kPartitionMagic)) {
      fail(ErrorCode::kParse, name + ": not a span partition file");
    }
    Partition p;
    p.length = in.u32();
    p.dim = in.u32();
    const std::uint64_t records = in.u64();
    const std::uint64_t occs = in.u64();
    const std::uint64_t surface_bytes = in.u64();
    // Reject sizes that cannot fit in the remaining bytes before allocating.
    if (records > bytes.size() || occs > bytes.size() || surface_bytes > bytes.size()) {
      fail(ErrorCode::kParse, name + ": corrupt header");
    }
    p.labels.resize(records);
    for (auto& l : p.labels) {
      const auto v = in.u8();
      if (v > 1) fail(ErrorCode::kParse, name + ": bad label byte");
      l = static_cast<Label>(v);
    }
    p.occ_offsets.resize(records + 1);
    for (auto& o : p.occ_offsets) o = in.u32();
    p.occurrences.resize(occs);
    for (auto& o : p.occurrences) {
      o.doc = in.u32();
      o.start = in.u32();
      if (o.doc >= doc_count) fail(ErrorCode::kParse, name + ": occurrence names unknown document");
    }
    p.surface_offsets.resize(records + 1);
    for (auto& o : p.surface_offsets) o = in.u32();
    p.surfaces = std::string(in.bytes(surface_bytes));
    p.embeddings.resize(records * p.dim);
    for (auto& f : p.embeddings) f = in.f32();
    if (!in.done()) fail(ErrorCode::kParse, name + ": trailing bytes");
    if (p.occ_offsets.front() != 0 || p.occ_offsets.back() != occs ||
        !std::is_sorted(p.occ_offsets.begin(), p.occ_offsets.end()) ||
        p.surface_offsets.front() != 0 || p.surface_offsets.back() != surface_bytes ||
        !std::is_sorted(p.surface_offsets.begin(), p.surface_offsets.end())) {
      fail(ErrorCode::kParse, name + ": inconsistent offsets");
    }
    p.compute_norms();
    return p;
  }
};

}  // namespace detail

using detail::NswGraph;
using detail::Partition;

struct SpanStore::Impl {
  StoreMetadata meta;
  std::vector<std::string> docs;
  std::vector<std::uint32_t> doc_rank;  // position of each doc id in sorted order
  std::unordered_map<std::string, std::uint32_t> doc_index;
  std::vector<std::shared_ptr<const Partition>> parts;  // parts[n - 1]
  std::vector<std::shared_ptr<const NswGraph>> graphs;  // null when not built

  void index_documents() {
    doc_index.clear();
    for (std::uint32_t i = 0; i < docs.size(); ++i) doc_index.emplace(docs[i], i);
    std::vector<std::uint32_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return docs[a] < docs[b]; });
    doc_rank.assign(docs.size(), 0);
    for (std::uint32_t r = 0; r < order.size(); ++r) doc_rank[order[r]] = r;
  }

  std::string compute_fingerprint(const std::vector<std::string>& part_bytes) const {
    Fnv1a h;
    h.update("spandetect-store/" + std::to_string(meta.version));
    h.update(std::string_view("\0", 1));
    h.update(meta.embedder_fingerprint);
    h.update(std::string_view("\0", 1));
    h.update(meta.tokenizer.kind);
    h.update_pod(static_cast<std::uint64_t>(meta.dim));
    h.update_pod(static_cast<std::uint64_t>(meta.n_max));
    h.update_pod(static_cast<std::uint64_t>(meta.k_default));
    h.update(meta.corpus_id);
    for (const auto& d : docs) {
      h.update(d);
      h.update(std::string_view("\0", 1));
    }
    for (const auto& bytes : part_bytes) h.update(bytes);
    return h.hex();
  }

  std::vector<std::string> serialize_parts() const {
    std::vector<std::string> out;
    out.reserve(parts.size());
    for (const auto& p : parts) out.push_back(p->serialize());
    return out;
  }

  void build_graphs(const ApproximateParams& params) {
    graphs.assign(parts.size(), nullptr);
    if (!params.enabled) return;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i]->size() >= params.exact_below && parts[i]->size() > 1) {
        graphs[i] = std::make_shared<NswGraph>(parts[i]->table(), params.max_degree, params.ef_construction);
      }
    }
  }
};

const SpanStore::Impl& SpanStore::impl() const {
  if (!impl_) fail(ErrorCode::kInvalidArgument, "span store is empty (not built or loaded)");
  return *impl_;
}

const StoreMetadata& SpanStore::metadata() const { return impl().meta; }

std::size_t SpanStore::partition_size(std::size_t length) const {
  const auto& s = impl();
  if (length == 0 || length > s.parts.size()) return 0;
  return s.parts[length - 1]->size();
}

std::size_t SpanStore::occurrence_count(std::size_t length) const {
  const auto& s = impl();
  if (length == 0 || length > s.parts.size()) return 0;
  return s.parts[length - 1]->occurrences.size();
}

std::size_t SpanStore::total_records() const {
  std::size_t total = 0;
  for (const auto& p : impl().parts) total += p->size();
  return total;
}

std::size_t SpanStore::total_occurrences() const {
  std::size_t total = 0;
  for (const auto& p : impl().parts) total += p->occurrences.size();
  return total;
}

RecordView SpanStore::record(std::size_t length, std::uint32_t index) const {
  const auto& s = impl();
  if (length == 0 || length > s.parts.size() || index >= s.parts[length - 1]->size()) {
    fail(ErrorCode::kInvalidArgument, "record index out of range");
  }
  const Partition& p = *s.parts[length - 1];
  RecordView v;
  v.length = p.length;
  v.label = p.labels[index];
  v.surface = std::string_view(p.surfaces)
                  .substr(p.surface_offsets[index], p.surface_offsets[index + 1] - p.surface_offsets[index]);
  v.embedding = std::span<const float>(p.embeddings).subspan(index * p.dim, p.dim);
  v.occurrences = std::span<const Occurrence>(p.occurrences)
                      .subspan(p.occ_offsets[index], p.occ_offsets[index + 1] - p.occ_offsets[index]);
  return v;
}

std::size_t SpanStore::document_count() const { return impl().docs.size(); }

const std::string& SpanStore::doc_id(std::uint32_t doc) const {
  const auto& s = impl();
  if (doc >= s.docs.size()) fail(ErrorCode::kInvalidArgument, "document index out of range");
  return s.docs[doc];
}

std::vector<Neighbor> SpanStore::knn(std::span<const float> query, std::size_t length, std::size_t k,
                                     const KnnOptions& options) const {
  const Impl& s = impl();
  if (length == 0 || length > s.parts.size()) {
    fail(ErrorCode::kInvalidArgument, "no partition for span length " + std::to_string(length));
  }
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  if (query.size() != s.meta.dim) {
    fail(ErrorCode::kMismatch, "query dim " + std::to_string(query.size()) + " does not match store dim " +
                                   std::to_string(s.meta.dim));
  }
  const Partition& p = *s.parts[length - 1];
  if (p.size() == 0) return {};

  std::optional<std::uint32_t> excluded;
  if (options.exclude_doc) {
    if (auto it = s.doc_index.find(*options.exclude_doc); it != s.doc_index.end()) excluded = it->second;
  }

  std::vector<double> q(query.begin(), query.end());
  double qq = 0.0;
  for (double v : q) qq += v * v;
  const double qnorm = std::sqrt(qq);
  const auto table = p.table();

  struct Candidate {
    double sim;
    std::uint32_t record;
  };
  std::vector<Candidate> cands;

  auto eligible = [&](std::uint32_t r) {
    if (!excluded) return true;
    for (std::uint32_t o = p.occ_offsets[r]; o < p.occ_offsets[r + 1]; ++o) {
      if (p.occurrences[o].doc != *excluded) return true;
    }
    return false;
  };

  const bool approximate = options.mode == SearchMode::kApproximate ||
                           (options.mode == SearchMode::kStoreDefault && s.meta.approximate.enabled);
  const NswGraph* graph = approximate ? s.graphs[length - 1].get() : nullptr;
  if (graph != nullptr) {
    const std::size_t ef =
        std::max(options.ef_search != 0 ? options.ef_search : s.meta.approximate.ef_search, k);
    for (std::uint32_t r : graph->search(table, q, qnorm, ef)) {
      if (eligible(r)) cands.push_back({detail::cosine_to_row(q, qnorm, table, r), r});
    }
  } else {
    cands.reserve(p.size());
    for (std::uint32_t r = 0; r < p.size(); ++r) {
      if (eligible(r)) cands.push_back({detail::cosine_to_row(q, qnorm, table, r), r});
    }
  }

  // Every record contributes at least one occurrence, so records below the
  // k-th best unique similarity can never reach the top k.
  if (cands.size() > k) {
    std::nth_element(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k - 1), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.sim > b.sim; });
    const double floor = cands[k - 1].sim;
    std::erase_if(cands, [&](const Candidate& c) { return c.sim < floor; });
  }

  std::vector<Neighbor> out;
  for (const auto& c : cands) {
    for (std::uint32_t o = p.occ_offsets[c.record]; o < p.occ_offsets[c.record + 1]; ++o) {
      const auto& occ = p.occurrences[o];
      if (excluded && occ.doc == *excluded) continue;
      out.push_back({p.length, c.record, occ.doc, occ.start, p.labels[c.record], c.sim});
    }
  }
  const auto before = [&](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.doc != b.doc) return s.doc_rank[a.doc] < s.doc_rank[b.doc];
    return a.start < b.start;
  };
  const std::size_t keep = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), before);
  out.resize(keep);
  return out;
}

void SpanStore::enable_approximate(const ApproximateParams& params) {
  auto next = std::make_shared<Impl>(impl());
  next->meta.approximate = params;
  next->build_graphs(params);
  impl_ = std::move(next);
}

void SpanStore::save(const std::filesystem::path& dir) const {
  const Impl& s = impl();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create store directory " + dir.string() + ": " + ec.message());

  nlohmann::ordered_json meta;
  meta["format"] = "spandetect-store";
  meta["version"] = s.meta.version;
  meta["fingerprint"] = s.meta.fingerprint;
  meta["embedder"] = {{"fingerprint", s.meta.embedder_fingerprint}, {"config", s.meta.embedder.to_json()}};
  meta["tokenizer"] = s.meta.tokenizer.kind;
  meta["dim"] = s.meta.dim;
  meta["n_max"] = s.meta.n_max;
  meta["k_default"] = s.meta.k_default;
  meta["corpus_id"] = s.meta.corpus_id;
  meta["approximate"] = s.meta.approximate.to_json();
  meta["documents"] = s.docs;
  nlohmann::ordered_json parts = nlohmann::ordered_json::array();
  for (const auto& p : s.parts) {
    parts.push_back({{"length", p->length},
                     {"file", partition_file(p->length)},
                     {"records", p->size()},
                     {"occurrences", p->occurrences.size()}});
  }
  meta["partitions"] = std::move(parts);

  for (const auto& p : s.parts) write_file(dir / partition_file(p->length), p->serialize());
  write_file(dir / kMetadataFile, meta.dump(2) + "\n");
}

SpanStore SpanStore::load(const std::filesystem::path& dir) {
  const auto meta_path = dir / kMetadataFile;
  if (!std::filesystem::exists(meta_path)) {
    fail(ErrorCode::kIo, "no span store at " + dir.string() + " (missing " + kMetadataFile + ")");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, meta_path.string() + ": " + e.what());
  }

  auto impl = std::make_shared<Impl>();
  try {
    if (meta.at("format").get<std::string>() != "spandetect-store") {
      fail(ErrorCode::kParse, meta_path.string() + ": not a span store");
    }
    impl->meta.version = meta.at("version").get<int>();
    if (impl->meta.version != kStoreFormatVersion) {
      fail(ErrorCode::kMismatch, "unsupported store format version " + std::to_string(impl->meta.version));
    }
    impl->meta.fingerprint = meta.at("fingerprint").get<std::string>();
    impl->meta.embedder_fingerprint = meta.at("embedder").at("fingerprint").get<std::string>();
    impl->meta.embedder = EmbedderConfig::from_json(meta.at("embedder").at("config"));
    impl->meta.tokenizer.kind = meta.at("tokenizer").get<std::string>();
    impl->meta.dim = meta.at("dim").get<std::size_t>();
    impl->meta.n_max = meta.at("n_max").get<std::size_t>();
    impl->meta.k_default = meta.at("k_default").get<std::size_t>();
    impl->meta.corpus_id = meta.at("corpus_id").get<std::string>();
    impl->meta.approximate = ApproximateParams::from_json(meta.at("approximate"));
    impl->docs = meta.at("documents").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, meta_path.string() + ": " + e.what());
  }
  impl->index_documents();

  std::vector<std::string> bytes;
  for (std::size_t n = 1; n <= impl->meta.n_max; ++n) {
    const auto path = dir / partition_file(n);
    bytes.push_back(read_file(path));
    auto part = std::make_shared<Partition>(Partition::parse(bytes.back(), path.string(), impl->docs.size()));
    if (part->length != n || part->dim != impl->meta.dim) {
      fail(ErrorCode::kParse, path.string() + ": header disagrees with metadata");
    }
    impl->parts.push_back(std::move(part));
  }
  const std::string actual = impl->compute_fingerprint(bytes);
  if (actual != impl->meta.fingerprint) {
    fail(ErrorCode::kMismatch, "store at " + dir.string() + " is corrupt: fingerprint " + actual +
                                   " does not match recorded " + impl->meta.fingerprint);
  }
  impl->build_graphs(impl->meta.approximate);
  return SpanStore(std::move(impl));
}

// --- Builder ----------------------------------------------------------------

struct SpanStore::Builder::State {
  struct PendingPartition {
    Partition part;
    std::vector<std::vector<Occurrence>> occs;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> dedup;
  };

  std::size_t dim;
  std::size_t n_max;
  std::vector<std::string> docs;
  std::unordered_map<std::string, std::uint32_t> doc_index;
  std::vector<PendingPartition> parts;
};

SpanStore::Builder::Builder(std::size_t dim, std::size_t n_max) : state_(std::make_unique<State>()) {
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "store dim must be positive");
  if (n_max == 0) fail(ErrorCode::kInvalidArgument, "n_max must be at least 1");
  state_->dim = dim;
  state_->n_max = n_max;
  state_->parts.resize(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    state_->parts[n - 1].part.length = static_cast<std::uint32_t>(n);
    state_->parts[n - 1].part.dim = dim;
  }
}

SpanStore::Builder::~Builder() = default;
SpanStore::Builder::Builder(Builder&&) noexcept = default;
SpanStore::Builder& SpanStore::Builder::operator=(Builder&&) noexcept = default;

void SpanStore::Builder::add(std::string_view doc_id, SpanRef span, Label label, std::string_view surface,
                             std::span<const float> embedding) {
  if (!state_) fail(ErrorCode::kInvalidArgument, "builder already finished");
  State& s = *state_;
  if (span.len == 0 || span.len > s.n_max) {
    fail(ErrorCode::kInvalidArgument, "span length " + std::to_string(span.len) + " outside 1.." +
                                          std::to_string(s.n_max));
  }
  if (embedding.size() != s.dim) {
    fail(ErrorCode::kMismatch, "embedding dim " + std::to_string(embedding.size()) +
                                   " does not match store dim " + std::to_string(s.dim));
  }
  for (float f : embedding) {
    if (!std::isfinite(f)) fail(ErrorCode::kInvalidArgument, "non-finite embedding component");
  }

  auto [it, inserted] = s.doc_index.try_emplace(std::string(doc_id), static_cast<std::uint32_t>(s.docs.size()));
  if (inserted) s.docs.emplace_back(doc_id);
  const Occurrence occ{it->second, span.start};

  auto& pending = s.parts[span.len - 1];
  Partition& p = pending.part;
  Fnv1a h;
  h.update_pod(static_cast<std::uint8_t>(label));
  h.update(surface);
  h.update(embedding.data(), embedding.size_bytes());
  auto& bucket = pending.dedup[h.digest()];
  for (std::uint32_t r : bucket) {
    const std::string_view existing =
        std::string_view(p.surfaces).substr(p.surface_offsets[r], p.surface_offsets[r + 1] - p.surface_offsets[r]);
    if (p.labels[r] == label && existing == surface &&
        std::memcmp(p.embeddings.data() + r * s.dim, embedding.data(), embedding.size_bytes()) == 0) {
      pending.occs[r].push_back(occ);
      return;
    }
  }
  const auto r = static_cast<std::uint32_t>(p.size());
  bucket.push_back(r);
  p.labels.push_back(label);
  p.surfaces.append(surface);
  p.surface_offsets.push_back(static_cast<std::uint32_t>(p.surfaces.size()));
  p.embeddings.insert(p.embeddings.end(), embedding.begin(), embedding.end());
  pending.occs.push_back({occ});
}

SpanStore SpanStore::Builder::finish(StoreMetadata metadata) && {
  if (!state_) fail(ErrorCode::kInvalidArgument, "builder already finished");
  State& s = *state_;
  auto impl = std::make_shared<Impl>();
  impl->meta = std::move(metadata);
  impl->meta.version = kStoreFormatVersion;
  impl->meta.dim = s.dim;
  impl->meta.n_max = s.n_max;
  impl->docs = std::move(s.docs);
  impl->index_documents();

  for (auto& pending : s.parts) {
    Partition& p = pending.part;
    p.occ_offsets.assign(1, 0);
    p.occurrences.clear();
    for (auto& list : pending.occs) {
      std::sort(list.begin(), list.end(), [&](const Occurrence& a, const Occurrence& b) {
        if (a.doc != b.doc) return impl->doc_rank[a.doc] < impl->doc_rank[b.doc];
        return a.start < b.start;
      });
      p.occurrences.insert(p.occurrences.end(), list.begin(), list.end());
      p.occ_offsets.push_back(static_cast<std::uint32_t>(p.occurrences.size()));
    }
    p.compute_norms();
    impl->parts.push_back(std::make_shared<Partition>(std::move(p)));
  }
  impl->meta.fingerprint = impl->compute_fingerprint(impl->serialize_parts());
  impl->build_graphs(impl->meta.approximate);
  state_.reset();
  return SpanStore(std::move(impl));
}

SpanStore build_store(const Corpus& corpus, const Embedder& embedder, const BuildOptions& options) {
  const Corpus train = corpus.subset(Split::kTrain);
  if (train.empty()) fail(ErrorCode::kInvalidArgument, "corpus has no train documents to build a store from");
  if (options.n_max == 0) fail(ErrorCode::kInvalidArgument, "n_max must be at least 1");
  if (options.k_default == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");

  SpanStore::Builder builder(embedder.dim(), options.n_max);
  const auto& docs = train.documents();
  const std::size_t group = embedder.config().kind == "remote" ? std::max<std::size_t>(embedder.config().batch_size, 1) : 1;
  constexpr std::size_t kChunk = 256;

  for (std::size_t first = 0; first < docs.size(); first += kChunk) {
    const std::size_t last = std::min(first + kChunk, docs.size());
    const std::size_t count = last - first;
    std::vector<TokenizedDoc> tokenized(count);
    for (std::size_t i = 0; i < count; ++i) tokenized[i] = tokenize(docs[first + i], options.tokenizer);

    std::vector<TokenVectors> vectors(count);
    const std::size_t groups = (count + group - 1) / group;
    parallel_for(groups, options.threads, [&](std::size_t g) {
      const std::size_t lo = g * group;
      const std::size_t hi = std::min(lo + group, count);
      auto out = embedder.embed_batch(std::span<const TokenizedDoc>(tokenized).subspan(lo, hi - lo));
      for (std::size_t i = lo; i < hi; ++i) {
        if (out[i - lo].size() != tokenized[i].size() || out[i - lo].dim != embedder.dim()) {
          fail(ErrorCode::kBackendProtocol, "embedder returned a malformed result for \"" +
                                                tokenized[i].doc_id + "\"");
        }
        vectors[i] = std::move(out[i - lo]);
      }
    });

    std::vector<std::vector<SpanEmbedding>> spans(count);
    parallel_for(count, options.threads, [&](std::size_t i) {
      for (const auto& ref : enumerate_spans(tokenized[i], 1, options.n_max)) {
        spans[i].push_back(span_embedding(vectors[i], ref));
      }
    });

    for (std::size_t i = 0; i < count; ++i) {
      const auto refs = enumerate_spans(tokenized[i], 1, options.n_max);
      for (std::size_t j = 0; j < refs.size(); ++j) {
        builder.add(tokenized[i].doc_id, refs[j], docs[first + i].label, tokenized[i].surface(refs[j]),
                    spans[i][j].values);
      }
    }
  }

  StoreMetadata meta;
  meta.embedder_fingerprint = embedder.fingerprint();
  meta.embedder = embedder.config();
  meta.tokenizer = options.tokenizer;
  meta.k_default = options.k_default;
  meta.corpus_id = train.id();
  meta.approximate = options.approximate;
  return std::move(builder).finish(std::move(meta));
}

}  // namespace spandetect
