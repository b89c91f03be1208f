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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "labalign/datagen.hpp"
#include "labalign/datasets.hpp"
#include "labalign/harness/report.hpp"
#include "labalign/harness/sweep.hpp"

namespace labalign::harness {

struct SolverOptions {
  Solver solver = Solver::kClosedForm;
  int iterations = 5000;
  StepSize step;
  int jobs = 0;

  SweepOptions sweep() const { return {solver, iterations, step, jobs}; }
};

/// Fits `config` to `prob` with the chosen solver.
SolutionReport fit(const RegularizedProblem& prob, const AdaptConfig& config,
                   const SolverOptions& options);

// ---------------------------------------------------------------------------
// Rotated-Gaussian scenario

struct SynthOptions {
  SyntheticSpec spec;
  std::vector<double> lambdas{1e-1, 1e1, 1e3};
  std::vector<double> l2_coefficients{0.0, 1e-1, 1e1, 1e3, 1e5};
  int cutoff = 1;  // k = k-tilde
  int runs = 1;    // run r uses seed spec.seed + r
  Index validation_size = 100;
  SolverOptions solver;
};

/// Tables: label_align (one row per lambda, lambda = 0 being the
/// unregularized fit), l2, unregularized and selection, per run.
RunReport run_synth(const SynthOptions& options);

// ---------------------------------------------------------------------------
// Bound verification

struct BoundCheckOptions {
  int count = 100;
  std::uint64_t seed = 0;
  Index min_n = 20;
  Index max_n = 100;
  Index min_d = 2;
  Index max_d = 10;
  bool include_synthetic = true;
};

/// Random instances plus an identical-domain instance and the rotated-Gaussian
/// instance. Every failing comparison is listed in violations.
RunReport run_bound_check(const BoundCheckOptions& options);

// ---------------------------------------------------------------------------
// Diagnostics

RunReport run_diagnose(const std::string& dataset, const DesignMatrix& design,
                       const Vector& labels, const std::vector<double>& eps);

struct EmergenceOptions {
  std::vector<double> noise_levels{0.0, 0.01, 0.05, 0.1, 10.0};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  Index n = 1000;
  Index d = 10;
  Index correlated = 9;
};

/// One row per (s, seed). Rows where the bound applies but the
/// measured projection falls below the bound are violations.
RunReport run_emergence(const EmergenceOptions& options);

// ---------------------------------------------------------------------------
// MNIST-USPS

struct DigitPair {
  int lo = 0;
  int hi = 1;
};

/// "0-1,2-3". Throws std::invalid_argument.
std::vector<DigitPair> parse_pairs(const std::string& text);
std::vector<DigitPair> all_pairs();
/// Fixed ten-pair subset used for quick runs.
std::vector<DigitPair> subset_pairs();

struct TaskColumn {
  std::string name;
  Direction direction = Direction::kMnistToUsps;
  double ratio = 1.0;
};

/// U->M, M->U, 0.3->U, 0.2->U, 0.1->U.
std::vector<TaskColumn> default_columns();
/// Column for `ratio` in the M->U direction ("M->U" when ratio is 1).
TaskColumn ratio_column(double ratio);

struct MnistUspsOptions {
  std::vector<DigitPair> pairs = subset_pairs();
  std::vector<TaskColumn> columns = default_columns();
  std::uint64_t seed = 0;
  Index validation_size = 100;
  SolverOptions solver{Solver::kGradientDescent, 5000, {}, 0};
};

/// Per (pair, column): the unregularized baseline and the validated
/// label-alignment sweep, both scored on the held-out target rows.
RunReport run_mnist_usps(const DigitCorpus& mnist, const DigitCorpus& usps,
                         const MnistUspsOptions& options);

// ---------------------------------------------------------------------------
// Generic CSV data

struct CsvTask {
  DesignMatrix source;
  Vector source_labels;
  DesignMatrix target;
  std::optional<Vector> target_labels;
};

/// Loads feature CSVs (labels in a trailing "label" column) and appends the
/// bias column. Source labels are required.
CsvTask load_csv_task(const std::filesystem::path& source,
                      const std::filesystem::path& target);

/// Single configuration; metrics on the target when its labels are known.
RunReport run_train(const CsvTask& task, const AdaptConfig& config,
                    const SolverOptions& solver, Metric metric);

/// Validated sweep; needs target labels. The first validation_size rows of a
/// seeded shuffle of the target form the validation set.
RunReport run_csv_sweep(const CsvTask& task, const SweepGrid& grid,
                        const SolverOptions& solver, Index validation_size,
                        std::uint64_t seed);

}  // namespace labalign::harness
