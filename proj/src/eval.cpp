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

#include "spandetect/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "spandetect/error.hpp"

namespace spandetect {

double auroc(std::span<const ScoredExample> examples) {
  std::size_t n_llm = 0;
  for (const auto& e : examples) n_llm += e.truth == Label::kLlm ? 1 : 0;
  const std::size_t n_human = examples.size() - n_llm;
  if (n_llm == 0 || n_human == 0) {
    fail(ErrorCode::kInvalidArgument, "AUROC needs both human and LLM examples");
  }

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return examples[a].score < examples[b].score; });

  // Sum of 1-based mid-ranks of the LLM examples.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && examples[order[j]].score == examples[order[i]].score) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (examples[order[t]].truth == Label::kLlm) rank_sum += mid;
    }
    i = j;
  }
  const double nl = static_cast<double>(n_llm);
  const double u = rank_sum - nl * (nl + 1.0) / 2.0;
  return u / (nl * static_cast<double>(n_human));
}

double threshold_at_fpr(std::span<const double> human_scores, double target_fpr) {
  if (human_scores.empty()) fail(ErrorCode::kInvalidArgument, "no human scores to calibrate on");
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "target FPR must lie strictly between 0 and 1");
  }
  std::vector<double> sorted(human_scores.begin(), human_scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t n = sorted.size();
  // Largest number of scores allowed strictly above the threshold.
  std::size_t allowed = 0;
  while (allowed + 1 < n && static_cast<double>(allowed + 1) / static_cast<double>(n) <= target_fpr) {
    ++allowed;
  }
  return sorted[allowed];
}

double false_positive_rate(std::span<const double> human_scores, double epsilon) {
  if (human_scores.empty()) return 0.0;
  const auto above = std::count_if(human_scores.begin(), human_scores.end(), [&](double s) { return s > epsilon; });
  return static_cast<double>(above) / static_cast<double>(human_scores.size());
}

double accuracy_at_threshold(std::span<const ScoredExample> examples, double epsilon) {
  if (examples.empty()) fail(ErrorCode::kInvalidArgument, "accuracy of an empty example set");
  std::size_t correct = 0;
  for (const auto& e : examples) {
    if ((e.score > epsilon) == (e.truth == Label::kLlm)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

std::vector<double> human_scores(std::span<const ScoredExample> examples) {
  std::vector<double> out;
  for (const auto& e : examples) {
    if (e.truth == Label::kHuman) out.push_back(e.score);
  }
  return out;
}

std::size_t choose_alpha(std::span<const AlphaPoint> grid) {
  if (grid.empty()) fail(ErrorCode::kInvalidArgument, "empty alpha grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[best];
    if (a.accuracy != b.accuracy) {
      if (a.accuracy > b.accuracy) best = i;
    } else if (a.auroc != b.auroc) {
      if (a.auroc > b.auroc) best = i;
    } else if (a.alpha < b.alpha) {
      best = i;
    }
  }
  return best;
}

nlohmann::ordered_json Calibration::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "spandetect-calibration";
  j["version"] = 1;
  j["alpha"] = alpha;
  j["epsilon"] = epsilon;
  j["target_fpr"] = target_fpr;
  j["k"] = k;
  j["n_max"] = n_max;
  j["split"] = split;
  j["store_fingerprint"] = store_fingerprint;
  j["corpus_id"] = corpus_id;
  j["norm_stats"] = stats.to_json();
  j["validation"] = {{"accuracy", validation_accuracy}, {"auroc", validation_auroc}, {"fpr", validation_fpr}};
  nlohmann::ordered_json g = nlohmann::ordered_json::array();
  for (const auto& p : grid) {
    g.push_back({{"alpha", p.alpha}, {"epsilon", p.epsilon}, {"accuracy", p.accuracy}, {"auroc", p.auroc}});
  }
  j["alpha_grid"] = std::move(g);
  j["domain_epsilon"] = domain_epsilon;
  return j;
}

Calibration Calibration::from_json(const nlohmann::json& j) {
  Calibration c;
  try {
    if (j.value("format", std::string{}) != "spandetect-calibration") {
      fail(ErrorCode::kParse, "not a calibration file");
    }
    c.alpha = j.at("alpha").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.target_fpr = j.at("target_fpr").get<double>();
    c.k = j.at("k").get<std::size_t>();
    c.n_max = j.at("n_max").get<std::size_t>();
    c.split = j.value("split", c.split);
    c.store_fingerprint = j.at("store_fingerprint").get<std::string>();
    c.corpus_id = j.value("corpus_id", std::string{});
    c.stats = NormStats::from_json(j.at("norm_stats"));
    if (auto v = j.find("validation"); v != j.end()) {
      c.validation_accuracy = v->value("accuracy", 0.0);
      c.validation_auroc = v->value("auroc", 0.0);
      c.validation_fpr = v->value("fpr", 0.0);
    }
    if (auto g = j.find("alpha_grid"); g != j.end()) {
      for (const auto& p : *g) {
        c.grid.push_back({p.at("alpha").get<double>(), p.at("epsilon").get<double>(),
                          p.at("accuracy").get<double>(), p.at("auroc").get<double>()});
      }
    }
    if (auto d = j.find("domain_epsilon"); d != j.end()) c.domain_epsilon = d->get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("bad calibration: ") + e.what());
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0) || c.k == 0 || c.n_max == 0) {
    fail(ErrorCode::kParse, "calibration values out of range");
  }
  return c;
}

Calibration load_calibration(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open calibration file " + path);
  const std::string text(std::istreambuf_iterator<char>(in), {});
  try {
    return Calibration::from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kParse, path + ": " + e.what());
  }
}

void save_calibration(const Calibration& calibration, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write calibration file " + path);
  out << calibration.to_json().dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace spandetect
