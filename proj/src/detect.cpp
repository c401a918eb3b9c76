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

#include "spandetect/detect.hpp"

#include <chrono>

#include "spandetect/error.hpp"

namespace spandetect {

SpanColor color_for(double prediction) noexcept {
  // P is a ratio of small integers, so exact comparison with 0.5 is sound.
  if (prediction < 0.5) return SpanColor::kHumanRed;
  if (prediction > 0.5) return SpanColor::kLlmBlue;
  return SpanColor::kNeutralGreen;
}

std::string_view to_string(SpanColor color) noexcept {
  switch (color) {
    case SpanColor::kHumanRed: return "human_red";
    case SpanColor::kNeutralGreen: return "neutral_green";
    case SpanColor::kLlmBlue: return "llm_blue";
  }
  return "neutral_green";
}

double overall_prediction(std::span<const double> predictions) {
  if (predictions.empty()) return 0.0;
  double sum = 0.0;
  for (double p : predictions) sum += p;
  return sum / static_cast<double>(predictions.size());
}

Label decide(double p_overall, double epsilon) noexcept {
  return p_overall > epsilon ? Label::kLlm : Label::kHuman;
}

nlohmann::ordered_json to_evidence_json(const DetectionResult& result) {
  nlohmann::ordered_json j;
  j["version"] = kEvidenceSchemaVersion;
  j["label"] = to_string(result.label);
  j["p_overall"] = result.p_overall;
  j["threshold"] = result.threshold;
  j["alpha"] = result.alpha;
  j["k"] = result.k;
  j["objective"] = result.segmentation.objective;
  j["store_fingerprint"] = result.store_fingerprint;
  nlohmann::ordered_json spans = nlohmann::ordered_json::array();
  for (const auto& e : result.evidence) {
    nlohmann::ordered_json s;
    s["text"] = e.text;
    s["start"] = e.span.start;
    s["len"] = e.span.len;
    s["p"] = e.scores.prediction;
    s["r"] = e.scores.reliability;
    s["l_std"] = e.scores.length_std;
    s["r_std"] = e.scores.reliability_std;
    s["color"] = to_string(e.color);
    s["no_evidence"] = e.scores.no_evidence;
    nlohmann::ordered_json ns = nlohmann::ordered_json::array();
    for (const auto& n : e.neighbors) {
      ns.push_back({{"text", n.text},
                    {"label", to_string(n.label)},
                    {"similarity", n.similarity},
                    {"doc_id", n.doc_id},
                    {"start", n.start}});
    }
    s["neighbors"] = std::move(ns);
    spans.push_back(std::move(s));
  }
  j["spans"] = std::move(spans);
  return j;
}

Detector::Detector(const SpanStore& store, const Embedder& embedder, NormStats stats)
    : store_(store), embedder_(embedder), stats_(std::move(stats)) {
  if (embedder_.fingerprint() != store_.metadata().embedder_fingerprint) {
    fail(ErrorCode::kMismatch, "embedder \"" + embedder_.fingerprint() + "\" does not match the store's \"" +
                                   store_.metadata().embedder_fingerprint + "\"");
  }
  if (embedder_.dim() != store_.dim()) {
    fail(ErrorCode::kMismatch, "embedder dim " + std::to_string(embedder_.dim()) +
                                   " does not match store dim " + std::to_string(store_.dim()));
  }
  if (!stats_.store_fingerprint.empty() && stats_.store_fingerprint != store_.fingerprint()) {
    fail(ErrorCode::kMismatch, "normalization stats were fitted against store " + stats_.store_fingerprint +
                                   ", but the loaded store is " + store_.fingerprint());
  }
}

PreparedText Detector::prepare(std::string_view doc_id, std::string_view text, std::size_t k,
                               std::size_t n_max, const KnnOptions& knn) const {
  TokenizedDoc doc = tokenize(doc_id, text, store_.metadata().tokenizer);
  const TokenVectors vectors = embedder_.embed(doc);
  return prepare(std::move(doc), vectors, k, n_max, knn);
}

PreparedText Detector::prepare(TokenizedDoc doc, const TokenVectors& vectors, std::size_t k,
                               std::size_t n_max, const KnnOptions& knn) const {
  if (vectors.size() != doc.size() || vectors.dim != store_.dim()) {
    fail(ErrorCode::kBackendProtocol, "embedder returned " + std::to_string(vectors.size()) +
                                          " vectors for " + std::to_string(doc.size()) + " tokens");
  }
  PreparedText out;
  out.table = score_all_spans(store_, vectors, n_max, k, knn);
  standardize(out.table, stats_);
  out.grid = ScoreGrid::from_table(out.table);
  out.doc = std::move(doc);
  return out;
}

double Detector::score(const PreparedText& text, double alpha, const SegmentOptions& segment) const {
  const Segmentation seg = segment_dp(text.grid, alpha, segment);
  std::vector<double> ps;
  ps.reserve(seg.spans.size());
  for (const auto& s : seg.spans) ps.push_back(text.table.at(s.start, s.len).prediction);
  return overall_prediction(ps);
}

DetectionResult Detector::finish(const PreparedText& text, double alpha, double epsilon, std::size_t k,
                                 const SegmentOptions& segment) const {
  DetectionResult r;
  r.doc_id = text.doc.doc_id;
  r.text = text.doc.text;
  r.alpha = alpha;
  r.threshold = epsilon;
  r.k = k;
  r.store_fingerprint = store_.fingerprint();
  r.segmentation = segment_dp(text.grid, alpha, segment);

  std::vector<double> ps;
  for (const auto& s : r.segmentation.spans) {
    const SpanScores& cell = text.table.at(s.start, s.len);
    ps.push_back(cell.prediction);
    EvidenceEntry e;
    e.span = s;
    e.text = std::string(text.doc.surface(s));
    e.scores = cell;
    e.scores.neighbors.clear();
    e.color = color_for(cell.prediction);
    for (const auto& n : cell.neighbors) {
      const RecordView rec = store_.record(n.length, n.record);
      e.neighbors.push_back({std::string(rec.surface), n.label, n.similarity, store_.doc_id(n.doc), n.start});
    }
    r.evidence.push_back(std::move(e));
  }
  r.p_overall = overall_prediction(ps);
  r.label = decide(r.p_overall, epsilon);
  return r;
}

DetectionResult Detector::detect(std::string_view text, const DetectParams& params,
                                 std::string_view doc_id) const {
  const auto t0 = std::chrono::steady_clock::now();
  if (text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
    fail(ErrorCode::kInvalidArgument, "text is empty");
  }
  const PreparedText prepared = prepare(doc_id, text, params.k, params.n_max, params.knn);
  DetectionResult r = finish(prepared, params.alpha, params.epsilon, params.k, params.segment);
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace spandetect
