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

#include "labalign/harness/metrics.hpp"

#include <stdexcept>

namespace labalign::harness {
namespace {

void check_lengths(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("prediction and label lengths differ");
  }
  if (a.size() == 0) throw std::invalid_argument("metrics need at least one row");
}

bool predicts_positive(double score) { return score >= 0.0; }

}  // namespace

double accuracy(const Vector& scores, const Vector& labels) {
  check_lengths(scores, labels);
  Index correct = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    if (predicts_positive(scores(i)) == (labels(i) > 0.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

F1Score f1_score(const Vector& scores, const Vector& labels) {
  check_lengths(scores, labels);
  Index tp = 0, fp = 0, fn = 0;
  for (Index i = 0; i < scores.size(); ++i) {
    const bool predicted = predicts_positive(scores(i));
    const bool actual = labels(i) > 0.0;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  if (tp + fp + fn == 0) return {0.0, true};
  return {2.0 * tp / static_cast<double>(2 * tp + fp + fn), false};
}

double mean_squared_error(const Vector& predictions, const Vector& targets) {
  check_lengths(predictions, targets);
  return (predictions - targets).squaredNorm() /
         static_cast<double>(predictions.size());
}

double param_distance(const Vector& w, const Vector& w_star) {
  if (w.size() != w_star.size()) {
    throw std::invalid_argument("weight vectors differ in length");
  }
  return (w - w_star).norm();
}

double evaluate(Metric metric, const Vector& scores, const Vector& labels) {
  switch (metric) {
    case Metric::kAccuracy:
      return accuracy(scores, labels);
    case Metric::kF1:
      return f1_score(scores, labels).value;
    case Metric::kMse:
      return mean_squared_error(scores, labels);
  }
  throw std::invalid_argument("unknown metric");
}

bool higher_is_better(Metric metric) { return metric != Metric::kMse; }

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kAccuracy:
      return "accuracy";
    case Metric::kF1:
      return "f1";
    case Metric::kMse:
      return "mse";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "accuracy") return Metric::kAccuracy;
  if (name == "f1") return Metric::kF1;
  if (name == "mse") return Metric::kMse;
  throw std::invalid_argument("unknown metric '" + std::string(name) +
                              "' (expected accuracy, f1 or mse)");
}

}  // namespace labalign::harness
