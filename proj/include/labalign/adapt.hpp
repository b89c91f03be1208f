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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "labalign/spectral.hpp"

namespace labalign {

enum class Mode {
  kLabelAlign,     // ||Phi w - y||^2 - source tail + lambda * target tail
  kUnregularized,  // ||Phi w - y||^2
  kL2,             // ||Phi w - y||^2 + c ||w||^2
};

/// How fit_gd picks its step size.
struct StepSize {
  enum class Rule {
    kAuto,            // 1 / (2 lambda_max(M)), monotone for the quadratic
    kFixed,           // caller-supplied value
    kInverseTwoSigma  // 1 / (2 sigma_1(Phi)), literal reading of the grid notes
  };
  Rule rule = Rule::kAuto;
  double value = 0.0;

  static StepSize automatic() { return {}; }
  static StepSize fixed(double alpha) { return {Rule::kFixed, alpha}; }
  static StepSize inverse_two_sigma() { return {Rule::kInverseTwoSigma, 0.0}; }
};

/// Evaluation strategy for fit_gd. Both produce the same iterates: kSpectral
/// applies the closed-form t-step recursion in the eigenbasis of M, which is
/// cheaper once t exceeds a small multiple of d.
enum class GdBackend { kAuto, kIterative, kSpectral };

struct AdaptConfig {
  int iterations = 5000;
  StepSize step;
  GdBackend gd_backend = GdBackend::kAuto;
  int source_cutoff = 1;  // k
  int target_cutoff = 1;  // k-tilde
  double lambda = 1.0;
  Mode mode = Mode::kLabelAlign;
  double l2_coefficient = 0.0;  // only read in Mode::kL2

  /// Throws std::invalid_argument if any field is out of range for dimension d.
  void validate(Index d) const;
};

/// Labeled source, unlabeled target and their spectra. Copies share the
/// immutable data; with_config() is cheap and is how sweeps vary settings.
class RegularizedProblem {
 public:
  RegularizedProblem(DesignMatrix source, Vector labels, DesignMatrix target,
                     AdaptConfig config = {});

  RegularizedProblem with_config(const AdaptConfig& config) const;

  const DesignMatrix& source() const { return data_->source; }
  const Vector& labels() const { return data_->labels; }
  const DesignMatrix& target() const { return data_->target; }
  const SpectralDecomposition& source_spectrum() const { return data_->source_spectrum; }
  const SpectralDecomposition& target_spectrum() const { return data_->target_spectrum; }
  const Matrix& source_gram() const { return data_->source_gram; }
  const Matrix& target_gram() const { return data_->target_gram; }
  /// Phi^T y.
  const Vector& source_moment() const { return data_->source_moment; }
  double label_norm_sq() const { return data_->label_norm_sq; }
  const AdaptConfig& config() const { return config_; }
  Index dim() const { return data_->source.cols(); }

  /// Quadratic-form matrix M of the configured objective:
  /// S_k + lambda (S~ - S~_k~) for label alignment, S for unregularized,
  /// S + c I for l2.
  Matrix system_matrix() const;

 private:
  struct Data {
    DesignMatrix source;
    Vector labels;
    DesignMatrix target;
    Matrix source_gram;
    Matrix target_gram;
    SpectralDecomposition source_spectrum;
    SpectralDecomposition target_spectrum;
    Vector source_moment;
    double label_norm_sq;
  };
  RegularizedProblem(std::shared_ptr<const Data> data, AdaptConfig config);

  std::shared_ptr<const Data> data_;
  AdaptConfig config_;
};

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;

  bool holds(double slack = 1e-9) const { return lhs <= rhs + slack; }
};

struct SolutionReport {
  Vector weights;
  std::vector<double> objective_trace;
  double step_size = 0.0;
  // Set when the solve fell back to the minimum-norm solution of a singular
  // but consistent system.
  bool minimum_norm = false;
  std::optional<double> param_distance;
  std::optional<BoundPair> regularized_bound;
  std::optional<BoundPair> source_bound;
};

/// Configured objective, evaluated term by term in the singular bases.
double objective_value(const Vector& w, const RegularizedProblem& prob);

/// Analytic gradient of objective_value.
Vector objective_gradient(const Vector& w, const RegularizedProblem& prob);

/// Full-batch gradient descent from w = 0 for config().iterations steps.
/// Throws DivergenceError once the objective exceeds 1e12 or turns non-finite.
SolutionReport fit_gd(const RegularizedProblem& prob);

/// Same, with M supplied by the caller.
SolutionReport fit_gd(const RegularizedProblem& prob, const Matrix& system);

/// Exact stationary point M^{-1} Phi^T y. Throws SingularSystemError when M
/// is singular and Phi^T y is outside its range.
SolutionReport fit_closed_form(const RegularizedProblem& prob);

/// Same, with M supplied by the caller (sweeps reuse truncated Grams).
SolutionReport fit_closed_form(const RegularizedProblem& prob,
                               const Matrix& system);

struct SymmetricSolve {
  Vector solution;
  bool minimum_norm = false;
  int rank = 0;
};

/// Solves M w = b for symmetric positive semidefinite M. Uses an LDL^T
/// factorization when M is numerically nonsingular; otherwise the
/// eigenvector pseudo-inverse. A singular, inconsistent system throws
/// SingularSystemError(message) unless allow_inconsistent, in which case the
/// least-squares minimum-norm solution is returned.
SymmetricSolve solve_symmetric_psd(const Matrix& m, const Vector& b,
                                   bool allow_inconsistent,
                                   const std::string& message);

/// Least-squares solution of the fully labeled target, S~^{-1} Phi~^T y~.
/// Throws SingularSystemError when S~ is singular.
Vector target_oracle(const DesignMatrix& target, const Vector& target_labels);

struct LeastSquaresFit {
  Vector weights;
  bool minimum_norm = false;
};

/// No-adaptation baselines on the source: plain least squares (minimum-norm
/// when S is singular) or ridge with coefficient l2_coefficient.
LeastSquaresFit source_least_squares(const DesignMatrix& source,
                                     const Vector& y, Mode mode,
                                     double l2_coefficient = 0.0);

/// Distance from the regularized solution to the target oracle and its
/// guaranteed ceiling
///   (||Phi^T y - Phi~^T y~|| + ||w_hat|| ||S_k - S~_k~||) / lambda_min(S~).
/// Requires lambda == 1 and nonsingular S~.
BoundPair regularized_solution_bound(const RegularizedProblem& prob,
                                     const Vector& w_hat,
                                     const Vector& w_target,
                                     const Vector& target_labels);

/// Same for the unregularized source solution, with full Gram matrices.
BoundPair source_solution_bound(const RegularizedProblem& prob,
                                const Vector& w_source,
                                const Vector& w_target,
                                const Vector& target_labels);

struct RewriteCheck {
  double direct = 0.0;        // ||Phi w - y||^2
  double reformulated = 0.0;  // singular-basis form plus out-of-span residual
};

RewriteCheck rewrite_check(const Vector& w, const DesignMatrix& source,
                           const Vector& y);

}  // namespace labalign
