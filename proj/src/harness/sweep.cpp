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

#include "labalign/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "labalign/error.hpp"

namespace labalign::harness {

std::vector<int> doubling_cutoffs(int rank) {
  if (rank < 1) throw std::invalid_argument("rank must be positive");
  if (rank < 8) return {rank};
  std::vector<int> cutoffs;
  for (long long c = 8; c <= rank; c *= 2) cutoffs.push_back(static_cast<int>(c));
  return cutoffs;
}

void SweepGrid::validate(Index d) const {
  if (lambdas.empty() || source_cutoffs.empty() || target_cutoffs.empty()) {
    throw std::invalid_argument("sweep grid lists must be non-empty");
  }
  for (const double l : lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("sweep lambdas must be finite and >= 0");
    }
  }
  for (const auto* list : {&source_cutoffs, &target_cutoffs}) {
    for (const int c : *list) {
      if (c < 0 || c > d) throw std::invalid_argument("sweep cutoff outside [0, d]");
    }
  }
}

SweepGrid SweepGrid::for_problem(const RegularizedProblem& prob, Metric metric) {
  SweepGrid grid;
  grid.source_cutoffs = doubling_cutoffs(std::max(prob.source_spectrum().rank, 1));
  grid.target_cutoffs = doubling_cutoffs(std::max(prob.target_spectrum().rank, 1));
  grid.metric = metric;
  return grid;
}

LabeledRows select_rows(const Matrix& design, const Vector& labels,
                        const std::vector<Index>& indices) {
  LabeledRows out{Matrix(static_cast<Index>(indices.size()), design.cols()),
                  Vector(static_cast<Index>(indices.size()))};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index r = indices[i];
    if (r < 0 || r >= design.rows()) throw std::out_of_range("row index out of range");
    out.features.row(static_cast<Index>(i)) = design.row(r);
    out.labels(static_cast<Index>(i)) = labels(r);
  }
  return out;
}

Solver parse_solver(const std::string& name) {
  if (name == "closed") return Solver::kClosedForm;
  if (name == "gd") return Solver::kGradientDescent;
  throw std::invalid_argument("unknown solver '" + name + "' (expected gd or closed)");
}

std::string_view solver_name(Solver solver) {
  return solver == Solver::kClosedForm ? "closed" : "gd";
}

std::optional<std::size_t> select_config(const std::vector<SweepRow>& rows,
                                         Metric metric) {
  std::optional<std::size_t> best;
  const bool maximize = higher_is_better(metric);
  auto key = [&](const SweepRow& r) {
    return std::make_tuple(r.lambda, r.source_cutoff, r.target_cutoff);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].ok) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double a = rows[i].validation;
    const double b = rows[*best].validation;
    const bool better = maximize ? a > b : a < b;
    if (better || (a == b && key(rows[i]) < key(rows[*best]))) best = i;
  }
  return best;
}

void parallel_for(std::size_t count, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> threads;
    for (unsigned t = 0; t < workers; ++t) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

SolutionReport fit_with(const RegularizedProblem& prob, const Matrix& system,
                        Solver solver) {
  return solver == Solver::kClosedForm ? fit_closed_form(prob, system)
                                       : fit_gd(prob, system);
}

}  // namespace

SweepResult run_sweep(const RegularizedProblem& base, const SweepGrid& grid,
                      const TargetSplit& split, const SweepOptions& options) {
  grid.validate(base.dim());
  if (split.validation.labels.size() == 0) {
    throw std::invalid_argument("sweep needs a non-empty validation set");
  }

  std::map<int, Matrix> source_part;
  std::map<int, Matrix> target_part;
  for (const int k : grid.source_cutoffs) {
    if (!source_part.contains(k)) source_part[k] = base.source_spectrum().truncated_gram(k);
  }
  for (const int k : grid.target_cutoffs) {
    if (!target_part.contains(k)) target_part[k] = base.target_spectrum().residual_gram(k);
  }

  SweepResult result;
  for (const double lambda : grid.lambdas) {
    for (const int k : grid.source_cutoffs) {
      for (const int kt : grid.target_cutoffs) {
        result.rows.push_back({lambda, k, kt, false, "", 0.0, 0.0});
      }
    }
  }

  std::vector<Vector> weights(result.rows.size());
  parallel_for(result.rows.size(), options.jobs, [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    AdaptConfig config = base.config();
    config.mode = Mode::kLabelAlign;
    config.lambda = row.lambda;
    config.source_cutoff = row.source_cutoff;
    config.target_cutoff = row.target_cutoff;
    config.iterations = options.iterations;
    config.step = options.step;
    const RegularizedProblem prob = base.with_config(config);
    Matrix system = source_part.at(row.source_cutoff);
    if (row.lambda != 0.0) system += row.lambda * target_part.at(row.target_cutoff);
    try {
      SolutionReport fit = fit_with(prob, 0.5 * (system + system.transpose()),
                                    options.solver);
      row.validation = evaluate(grid.metric, split.validation.features * fit.weights,
                                split.validation.labels);
      row.evaluation = split.evaluation.labels.size() > 0
                           ? evaluate(grid.metric, split.evaluation.features * fit.weights,
                                      split.evaluation.labels)
                           : row.validation;
      row.ok = true;
      weights[i] = std::move(fit.weights);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
  });

  const auto best = select_config(result.rows, grid.metric);
  if (!best) {
    std::ostringstream msg;
    msg << "every sweep configuration failed:";
    for (const SweepRow& row : result.rows) {
      msg << "\n  lambda=" << row.lambda << " k=" << row.source_cutoff
          << " k~=" << row.target_cutoff << ": " << row.error;
    }
    throw NumericalError(msg.str());
  }
  result.selected = *best;
  result.weights = std::move(weights[*best]);
  return result;
}

}  // namespace labalign::harness
