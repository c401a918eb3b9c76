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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spandetect/corpus.hpp"
#include "spandetect/score.hpp"

namespace spandetect {

struct ScoredExample {
  std::string doc_id;
  Label truth = Label::kHuman;
  double score = 0.0;
  std::string domain;
  std::string generator;
};

/// Mann-Whitney AUROC with mid-ranks for ties. Needs both classes.
double auroc(std::span<const ScoredExample> examples);

/// Smallest epsilon such that the fraction of human scores strictly above it
/// is at most target_fpr. Always one of the input scores.
double threshold_at_fpr(std::span<const double> human_scores, double target_fpr);

/// Fraction of human scores strictly above epsilon.
double false_positive_rate(std::span<const double> human_scores, double epsilon);

/// Fraction of examples where (score > epsilon) agrees with truth == LLM.
double accuracy_at_threshold(std::span<const ScoredExample> examples, double epsilon);

std::vector<double> human_scores(std::span<const ScoredExample> examples);

struct AlphaPoint {
  double alpha = 0.0;
  double epsilon = 0.0;
  double accuracy = 0.0;
  double auroc = 0.0;
};

/// Index of the best point: highest accuracy, then highest AUROC, then lowest
/// alpha.
std::size_t choose_alpha(std::span<const AlphaPoint> grid);

/// Everything needed to classify with a fixed operating point, fitted on the
/// validation split.
struct Calibration {
  double alpha = 0.5;
  double epsilon = 0.5;
  double target_fpr = 0.01;
  std::size_t k = 10;
  std::size_t n_max = 20;
  NormStats stats;
  std::string split = "validation";
  std::string store_fingerprint;
  std::string corpus_id;
  double validation_accuracy = 0.0;
  double validation_auroc = 0.0;
  double validation_fpr = 0.0;
  std::vector<AlphaPoint> grid;
  std::map<std::string, double> domain_epsilon;  // per-domain thresholds at `alpha`

  nlohmann::ordered_json to_json() const;
  static Calibration from_json(const nlohmann::json& j);
};

Calibration load_calibration(const std::string& path);
void save_calibration(const Calibration& calibration, const std::string& path);

}  // namespace spandetect
