/*
 * Copyright 2026 The labalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>

#include "labalign/spectral.hpp"

namespace labalign::harness {

enum class Metric { kAccuracy, kF1, kMse };

/// Fraction of rows where sign(score) matches the +-1 label. A score of
/// exactly zero predicts +1.
double accuracy(const Vector& scores, const Vector& labels);

struct F1Score {
  double value = 0.0;
  // No predicted and no actual positives; value is reported as 0.
  bool undefined = false;
};

/// F1 of the +1 class, with predictions thresholded as in accuracy().
F1Score f1_score(const Vector& scores, const Vector& labels);

double mean_squared_error(const Vector& predictions, const Vector& targets);

/// Euclidean distance ||w - w_star||.
double param_distance(const Vector& w, const Vector& w_star);

double evaluate(Metric metric, const Vector& scores, const Vector& labels);
bool higher_is_better(Metric metric);
std::string_view metric_name(Metric metric);
/// Accepts "accuracy", "f1" and "mse". Throws std::invalid_argument.
Metric parse_metric(std::string_view name);

}  // namespace labalign::harness
