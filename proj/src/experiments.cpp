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

#include "spandetect/experiments.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "spandetect/error.hpp"
#include "spandetect/util.hpp"

namespace spandetect {
namespace {

std::size_t effective_n_max(const SpanStore& store, std::size_t requested) {
  if (requested == 0) return store.n_max();
  if (requested > store.n_max()) {
    fail(ErrorCode::kInvalidArgument, "n_max " + std::to_string(requested) + " exceeds the store's " +
                                          std::to_string(store.n_max()));
  }
  return requested;
}

Corpus require_split(const Corpus& corpus, Split split) {
  Corpus out = corpus.subset(split);
  if (out.empty()) fail(ErrorCode::kInvalidArgument, "corpus has no " + std::string(to_string(split)) + " documents");
  return out;
}

struct Metrics {
  std::size_t n_human = 0;
  std::size_t n_llm = 0;
  double epsilon = 0.0;
  double auroc = 0.0;
  double accuracy = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;

  nlohmann::ordered_json to_json() const {
    return {{"n_human", n_human}, {"n_llm", n_llm}, {"epsilon", epsilon}, {"auroc", auroc},
            {"accuracy", accuracy}, {"fpr", fpr},   {"tpr", tpr}};
  }
};

Metrics measure(std::span<const ScoredExample> examples, double epsilon) {
  Metrics m;
  m.epsilon = epsilon;
  std::vector<double> llm;
  for (const auto& e : examples) {
    if (e.truth == Label::kLlm) {
      ++m.n_llm;
      llm.push_back(e.score);
    } else {
      ++m.n_human;
    }
  }
  m.auroc = auroc(examples);
  m.accuracy = accuracy_at_threshold(examples, epsilon);
  m.fpr = false_positive_rate(human_scores(examples), epsilon);
  m.tpr = false_positive_rate(llm, epsilon);  // fraction of LLM scores above epsilon
  return m;
}

std::map<std::string, double> domain_thresholds(std::span<const ScoredExample> examples, double target_fpr) {
  std::map<std::string, std::vector<double>> by_domain;
  for (const auto& e : examples) {
    if (e.truth == Label::kHuman) by_domain[e.domain].push_back(e.score);
  }
  std::map<std::string, double> out;
  for (const auto& [domain, scores] : by_domain) out[domain] = threshold_at_fpr(scores, target_fpr);
  return out;
}

nlohmann::ordered_json calibration_summary(const Calibration& c) {
  return {{"alpha", c.alpha},
          {"epsilon", c.epsilon},
          {"target_fpr", c.target_fpr},
          {"k", c.k},
          {"n_max", c.n_max},
          {"validation_accuracy", c.validation_accuracy},
          {"validation_auroc", c.validation_auroc}};
}

Detector make_detector(const SpanStore& store, const Embedder& embedder, const Calibration& calibration) {
  if (!calibration.store_fingerprint.empty() && calibration.store_fingerprint != store.fingerprint()) {
    fail(ErrorCode::kMismatch, "calibration was fitted against store " + calibration.store_fingerprint +
                                   ", but the loaded store is " + store.fingerprint());
  }
  return Detector(store, embedder, calibration.stats);
}

}  // namespace

std::vector<PreparedText> score_documents(const SpanStore& store, const Embedder& embedder, const Corpus& docs,
                                          std::size_t k, std::size_t n_max, std::size_t threads,
                                          const KnnOptions& knn) {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");
  n_max = effective_n_max(store, n_max);
  if (embedder.fingerprint() != store.metadata().embedder_fingerprint) {
    fail(ErrorCode::kMismatch, "embedder \"" + embedder.fingerprint() + "\" does not match the store's \"" +
                                   store.metadata().embedder_fingerprint + "\"");
  }
  const auto& list = docs.documents();
  std::vector<PreparedText> out(list.size());
  parallel_for(list.size(), threads, [&](std::size_t i) {
    out[i].doc = tokenize(list[i], store.metadata().tokenizer);
    const TokenVectors vectors = embedder.embed(out[i].doc);
    if (vectors.size() != out[i].doc.size()) {
      fail(ErrorCode::kBackendProtocol, "embedder returned " + std::to_string(vectors.size()) +
                                            " vectors for " + std::to_string(out[i].doc.size()) + " tokens");
    }
    out[i].table = score_all_spans(store, vectors, n_max, k, knn);
  });
  return out;
}

NormStats fit_norm_stats(const std::vector<PreparedText>& raw) {
  std::vector<double> lengths;
  std::vector<double> reliabilities;
  for (const auto& t : raw) {
    for (const auto& c : t.table.cells()) {
      lengths.push_back(static_cast<double>(c.length));
      reliabilities.push_back(c.reliability);
    }
  }
  return fit_norm_stats(lengths, reliabilities);
}

NormStats fit_norm_stats(const SpanStore& store, const Corpus& validation, const Embedder& embedder,
                         std::size_t n_max, std::size_t k, std::size_t threads) {
  const Corpus docs = require_split(validation, Split::kValidation);
  NormStats stats = fit_norm_stats(score_documents(store, embedder, docs, k, n_max, threads));
  stats.corpus_id = docs.id();
  stats.split = "validation";
  stats.store_fingerprint = store.fingerprint();
  return stats;
}

void apply_norm_stats(std::vector<PreparedText>& texts, const NormStats& stats) {
  for (auto& t : texts) {
    standardize(t.table, stats);
    t.grid = ScoreGrid::from_table(t.table);
  }
}

std::vector<ScoredExample> score_examples(const Detector& detector, const Corpus& docs,
                                          const std::vector<PreparedText>& prepared, double alpha,
                                          const SegmentOptions& segment, std::size_t threads) {
  const auto& list = docs.documents();
  if (list.size() != prepared.size()) fail(ErrorCode::kInternal, "prepared texts do not match the corpus");
  std::vector<ScoredExample> out(list.size());
  parallel_for(list.size(), threads, [&](std::size_t i) {
    out[i] = {list[i].doc_id, list[i].label, detector.score(prepared[i], alpha, segment), list[i].domain,
              list[i].generator};
  });
  return out;
}

Calibration select_alpha(const Detector& detector, const Corpus& validation,
                         const std::vector<PreparedText>& prepared, const PipelineOptions& options) {
  Calibration cal;
  cal.target_fpr = options.target_fpr;
  cal.k = options.k;
  cal.n_max = effective_n_max(detector.store(), options.n_max);
  cal.stats = detector.stats();
  cal.store_fingerprint = detector.store().fingerprint();
  cal.corpus_id = validation.id();

  std::vector<std::vector<ScoredExample>> per_alpha;
  for (double alpha : sweep_alpha_values()) {
    auto examples = score_examples(detector, validation, prepared, alpha, options.segment, options.threads);
    const double eps = threshold_at_fpr(human_scores(examples), options.target_fpr);
    cal.grid.push_back({alpha, eps, accuracy_at_threshold(examples, eps), auroc(examples)});
    per_alpha.push_back(std::move(examples));
  }
  const std::size_t best = choose_alpha(cal.grid);
  cal.alpha = cal.grid[best].alpha;
  cal.epsilon = cal.grid[best].epsilon;
  cal.validation_accuracy = cal.grid[best].accuracy;
  cal.validation_auroc = cal.grid[best].auroc;
  cal.validation_fpr = false_positive_rate(human_scores(per_alpha[best]), cal.epsilon);
  cal.domain_epsilon = domain_thresholds(per_alpha[best], options.target_fpr);
  return cal;
}

Calibration calibrate(const SpanStore& store, const Embedder& embedder, const Corpus& corpus,
                      const PipelineOptions& options) {
  const Corpus validation = require_split(corpus, Split::kValidation);
  const std::size_t n_max = effective_n_max(store, options.n_max);
  auto prepared = score_documents(store, embedder, validation, options.k, n_max, options.threads, options.knn);
  NormStats stats = fit_norm_stats(prepared);
  stats.corpus_id = validation.id();
  stats.split = "validation";
  stats.store_fingerprint = store.fingerprint();
  apply_norm_stats(prepared, stats);
  const Detector detector(store, embedder, stats);
  return select_alpha(detector, validation, prepared, options);
}

nlohmann::ordered_json evaluate(const SpanStore& store, const Embedder& embedder, const Calibration& calibration,
                                const Corpus& corpus, const PipelineOptions& options) {
  const Corpus test = require_split(corpus, Split::kTest);
  const Detector detector = make_detector(store, embedder, calibration);
  auto prepared = score_documents(store, embedder, test, calibration.k, calibration.n_max, options.threads,
                                  options.knn);
  apply_norm_stats(prepared, calibration.stats);
  const auto examples =
      score_examples(detector, test, prepared, calibration.alpha, options.segment, options.threads);

  const Metrics pooled = measure(examples, calibration.epsilon);

  // Cells: every (domain, generator) seen among LLM test documents, paired
  // with the human test documents of the same domain.
  std::set<std::pair<std::string, std::string>> cells;
  for (const auto& e : examples) {
    if (e.truth == Label::kLlm) cells.insert({e.domain, e.generator});
  }
  nlohmann::ordered_json cell_reports = nlohmann::ordered_json::array();
  double sum_auroc = 0.0, sum_acc = 0.0;
  std::size_t counted = 0;
  for (const auto& [domain, generator] : cells) {
    std::vector<ScoredExample> subset;
    for (const auto& e : examples) {
      if (e.domain != domain) continue;
      if (e.truth == Label::kHuman || e.generator == generator) subset.push_back(e);
    }
    double eps = calibration.epsilon;
    if (options.per_domain_thresholds) {
      if (auto it = calibration.domain_epsilon.find(domain); it != calibration.domain_epsilon.end()) eps = it->second;
    }
    nlohmann::ordered_json cell;
    cell["domain"] = domain;
    cell["generator"] = generator;
    const bool both = std::any_of(subset.begin(), subset.end(), [](const auto& e) { return e.truth == Label::kHuman; });
    if (both) {
      const Metrics m = measure(subset, eps);
      cell["metrics"] = m.to_json();
      sum_auroc += m.auroc;
      sum_acc += m.accuracy;
      ++counted;
    } else {
      cell["metrics"] = nullptr;
    }
    cell_reports.push_back(std::move(cell));
  }

  nlohmann::ordered_json report;
  report["format"] = "spandetect-report";
  report["version"] = kReportVersion;
  report["kind"] = "evaluate";
  report["config"] = options.run_config;
  report["store_fingerprint"] = store.fingerprint();
  report["corpus_id"] = test.id();
  report["calibration"] = calibration_summary(calibration);
  report["threshold_mode"] = options.per_domain_thresholds ? "per-domain" : "global";
  report["pooled"] = pooled.to_json();
  report["cells"] = std::move(cell_reports);
  report["average"] = counted == 0 ? nlohmann::ordered_json(nullptr)
                                   : nlohmann::ordered_json{{"auroc", sum_auroc / static_cast<double>(counted)},
                                                            {"accuracy", sum_acc / static_cast<double>(counted)},
                                                            {"cells", counted}};
  nlohmann::ordered_json ex = nlohmann::ordered_json::array();
  for (const auto& e : examples) {
    ex.push_back({{"doc_id", e.doc_id}, {"label", to_string(e.truth)}, {"score", e.score}});
  }
  report["examples"] = std::move(ex);
  return report;
}

nlohmann::ordered_json sweep_alpha(const SpanStore& store, const Embedder& embedder,
                                   const Calibration& calibration, const Corpus& corpus,
                                   const PipelineOptions& options) {
  const Corpus validation = require_split(corpus, Split::kValidation);
  const Corpus test = require_split(corpus, Split::kTest);
  const Detector detector = make_detector(store, embedder, calibration);
  auto val = score_documents(store, embedder, validation, calibration.k, calibration.n_max, options.threads,
                             options.knn);
  auto tst = score_documents(store, embedder, test, calibration.k, calibration.n_max, options.threads, options.knn);
  apply_norm_stats(val, calibration.stats);
  apply_norm_stats(tst, calibration.stats);

  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (double alpha : sweep_alpha_values()) {
    const auto v = score_examples(detector, validation, val, alpha, options.segment, options.threads);
    const double eps = threshold_at_fpr(human_scores(v), calibration.target_fpr);
    const auto t = score_examples(detector, test, tst, alpha, options.segment, options.threads);
    const Metrics m = measure(t, eps);
    nlohmann::ordered_json p;
    p["alpha"] = alpha;
    p["validation_accuracy"] = accuracy_at_threshold(v, eps);
    p["test"] = m.to_json();
    points.push_back(std::move(p));
  }

  nlohmann::ordered_json report;
  report["format"] = "spandetect-report";
  report["version"] = kReportVersion;
  report["kind"] = "sweep-alpha";
  report["config"] = options.run_config;
  report["store_fingerprint"] = store.fingerprint();
  report["calibration"] = calibration_summary(calibration);
  report["points"] = std::move(points);
  return report;
}

Corpus sample_train_pairs(const Corpus& corpus, std::size_t pairs, std::uint64_t seed) {
  std::vector<std::size_t> human, llm;
  const auto& docs = corpus.documents();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].split != Split::kTrain) continue;
    (docs[i].label == Label::kHuman ? human : llm).push_back(i);
  }
  if (pairs == 0 || pairs > std::min(human.size(), llm.size())) {
    fail(ErrorCode::kInvalidArgument, "sample of " + std::to_string(pairs) + " pairs exceeds the " +
                                          std::to_string(std::min(human.size(), llm.size())) +
                                          " train pairs available");
  }
  std::mt19937_64 rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    // Fisher-Yates with a fixed index rule so samples match across platforms.
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
  };
  shuffle(human);
  shuffle(llm);
  std::vector<char> keep(docs.size(), 0);
  for (std::size_t i = 0; i < pairs; ++i) keep[human[i]] = keep[llm[i]] = 1;

  std::vector<Document> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].split != Split::kTrain || keep[i]) out.push_back(docs[i]);
  }
  return Corpus(std::move(out));
}

nlohmann::ordered_json sweep_datastore_size(const Corpus& corpus, const Embedder& embedder,
                                            const std::vector<std::size_t>& sizes, std::uint64_t seed,
                                            const BuildOptions& build, const PipelineOptions& options) {
  if (sizes.empty()) fail(ErrorCode::kInvalidArgument, "no datastore sizes given");
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  std::vector<double> aurocs, accs;
  for (std::size_t pairs : sizes) {
    const Corpus sub = sample_train_pairs(corpus, pairs, seed);
    const SpanStore store = build_store(sub, embedder, build);
    const Calibration cal = calibrate(store, embedder, sub, options);
    const auto rep = evaluate(store, embedder, cal, sub, options);
    nlohmann::ordered_json p;
    p["pairs"] = pairs;
    p["store_fingerprint"] = store.fingerprint();
    p["records"] = store.total_records();
    p["occurrences"] = store.total_occurrences();
    p["calibration"] = calibration_summary(cal);
    p["pooled"] = rep["pooled"];
    p["average"] = rep["average"];
    aurocs.push_back(rep["pooled"]["auroc"].get<double>());
    accs.push_back(rep["pooled"]["accuracy"].get<double>());
    points.push_back(std::move(p));
  }

  nlohmann::ordered_json report;
  report["format"] = "spandetect-report";
  report["version"] = kReportVersion;
  report["kind"] = "sweep-size";
  report["config"] = options.run_config;
  report["seed"] = seed;
  report["sizes"] = sizes;
  report["points"] = std::move(points);
  report["monotone_auroc"] = std::is_sorted(aurocs.begin(), aurocs.end());
  report["monotone_accuracy"] = std::is_sorted(accs.begin(), accs.end());
  return report;
}

}  // namespace spandetect
