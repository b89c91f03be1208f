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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "labalign/adapt.hpp"
#include "labalign/harness/metrics.hpp"

namespace labalign::harness {

/// 8, 16, 32, ... up to and including `rank`. A rank below 8 yields {rank}.
std::vector<int> doubling_cutoffs(int rank);

struct SweepGrid {
  std::vector<double> lambdas{1e-1, 1e1, 1e3};
  std::vector<int> source_cutoffs;  // k
  std::vector<int> target_cutoffs;  // k-tilde
  Metric metric = Metric::kAccuracy;

  /// Throws std::invalid_argument on empty lists or cutoffs outside [0, d].
  void validate(Index d) const;
  /// Default grid: doubling cutoffs up to each domain's numerical rank.
  static SweepGrid for_problem(const RegularizedProblem& prob, Metric metric);
};

/// Labeled target rows: a small validation set for model selection and the
/// held-out remainder for reporting. Rows include the bias column.
struct LabeledRows {
  Matrix features;
  Vector labels;
};

struct TargetSplit {
  LabeledRows validation;
  LabeledRows evaluation;
};

/// Rows `indices` of (design, labels).
LabeledRows select_rows(const Matrix& design, const Vector& labels,
                        const std::vector<Index>& indices);

enum class Solver { kClosedForm, kGradientDescent };

Solver parse_solver(const std::string& name);
std::string_view solver_name(Solver solver);

struct SweepOptions {
  Solver solver = Solver::kClosedForm;
  int iterations = 5000;
  StepSize step;
  int jobs = 0;  // 0 selects std::thread::hardware_concurrency()
};

struct SweepRow {
  double lambda = 0.0;
  int source_cutoff = 0;
  int target_cutoff = 0;
  bool ok = false;
  std::string error;
  double validation = 0.0;
  double evaluation = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // lambda-major, then k, then k-tilde
  std::size_t selected = 0;
  Vector weights;              // of the selected configuration
};

/// Index of the best successful row by validation metric; ties go to the
/// smallest (lambda, k, k-tilde). nullopt when no row succeeded.
std::optional<std::size_t> select_config(const std::vector<SweepRow>& rows,
                                         Metric metric);

/// Fits every grid configuration of `base` (label alignment mode) and selects
/// by the validation metric. Configurations run in parallel; results do not
/// depend on the job count. Throws NumericalError listing the failures when
/// every configuration fails.
SweepResult run_sweep(const RegularizedProblem& base, const SweepGrid& grid,
                      const TargetSplit& split, const SweepOptions& options);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any call is rethrown after all threads finish.
void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace labalign::harness
