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

#include "labalign/adapt.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "labalign/error.hpp"

namespace labalign {
namespace {

constexpr double kDivergenceLimit = 1e12;
constexpr double kConsistencyTolerance = 1e-6;
constexpr const char* kSingularRegularized =
    "regularized system singular; increase λ, k, or k̃";

// w^T M w - 2 b^T w + c, given M w.
double quadratic_value(const Vector& w, const Vector& mw, const Vector& b,
                       double c) {
  return w.dot(mw) - 2.0 * b.dot(w) + c;
}

// Sum over i >= skip of weight_i * coord_i^2.
double tail_energy(const Vector& coords, const Vector& singular_values,
                   int skip) {
  double total = 0.0;
  for (Index i = skip; i < coords.size(); ++i) {
    const double s = singular_values(i);
    total += s * s * coords(i) * coords(i);
  }
  return total;
}

// sum_{i >= skip} sigma_i^2 v_i (v_i^T w).
Vector tail_product(const Vector& w, const SpectralDecomposition& sd,
                    int skip) {
  const Index count = sd.d - skip;
  if (count <= 0) return Vector::Zero(sd.d);
  const auto basis = sd.right_vectors.rightCols(count);
  const Vector scaled =
      (basis.transpose() * w).cwiseProduct(sd.singular_values.tail(count).array().square().matrix());
  return basis * scaled;
}

}  // namespace

void AdaptConfig::validate(Index d) const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (source_cutoff < 0 || source_cutoff > d) {
    throw std::invalid_argument("source cutoff k must lie in [0, d]");
  }
  if (target_cutoff < 0 || target_cutoff > d) {
    throw std::invalid_argument("target cutoff k~ must lie in [0, d]");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be finite and >= 0");
  }
  if (mode == Mode::kL2 && !(l2_coefficient >= 0.0)) {
    throw std::invalid_argument("l2 coefficient must be >= 0");
  }
  if (step.rule == StepSize::Rule::kFixed && !(step.value >= 0.0)) {
    throw std::invalid_argument("step size must be >= 0");
  }
}

RegularizedProblem::RegularizedProblem(DesignMatrix source, Vector labels,
                                       DesignMatrix target, AdaptConfig config)
    : config_(config) {
  if (source.cols() != target.cols()) {
    throw std::invalid_argument("source and target feature dimensions differ");
  }
  if (labels.size() != source.rows()) {
    throw std::invalid_argument("label count does not match source rows");
  }
  if (!labels.allFinite()) throw std::invalid_argument("labels must be finite");
  config_.validate(source.cols());

  Matrix source_gram = gram(source);
  Matrix target_gram = gram(target);
  SpectralDecomposition source_spectrum =
      decompose_gram(source_gram, source.rows(), source.cols());
  SpectralDecomposition target_spectrum =
      decompose_gram(target_gram, target.rows(), target.cols());
  Vector moment = source.data().transpose() * labels;
  const double label_norm_sq = labels.squaredNorm();
  data_ = std::make_shared<const Data>(Data{
      std::move(source), std::move(labels), std::move(target),
      std::move(source_gram), std::move(target_gram),
      std::move(source_spectrum), std::move(target_spectrum),
      std::move(moment), label_norm_sq});
}

RegularizedProblem::RegularizedProblem(std::shared_ptr<const Data> data,
                                       AdaptConfig config)
    : data_(std::move(data)), config_(config) {
  config_.validate(data_->source.cols());
}

RegularizedProblem RegularizedProblem::with_config(
    const AdaptConfig& config) const {
  return RegularizedProblem(data_, config);
}

Matrix RegularizedProblem::system_matrix() const {
  switch (config_.mode) {
    case Mode::kUnregularized:
      return source_gram();
    case Mode::kL2: {
      Matrix m = source_gram();
      m.diagonal().array() += config_.l2_coefficient;
      return m;
    }
    case Mode::kLabelAlign:
      break;
  }
  Matrix m = source_spectrum().truncated_gram(config_.source_cutoff);
  if (config_.lambda != 0.0) {
    m += config_.lambda * target_spectrum().residual_gram(config_.target_cutoff);
  }
  return 0.5 * (m + m.transpose());
}

double objective_value(const Vector& w, const RegularizedProblem& prob) {
  if (w.size() != prob.dim()) {
    throw std::invalid_argument("weight vector length does not match d");
  }
  const AdaptConfig& config = prob.config();
  double value = (prob.source().data() * w - prob.labels()).squaredNorm();
  switch (config.mode) {
    case Mode::kUnregularized:
      return value;
    case Mode::kL2:
      return value + config.l2_coefficient * w.squaredNorm();
    case Mode::kLabelAlign:
      break;
  }
  const SpectralDecomposition& src = prob.source_spectrum();
  const SpectralDecomposition& tgt = prob.target_spectrum();
  value -= tail_energy(coordinates(w, src), src.singular_values,
                       config.source_cutoff);
  value += config.lambda * tail_energy(coordinates(w, tgt), tgt.singular_values,
                                       config.target_cutoff);
  return value;
}

Vector objective_gradient(const Vector& w, const RegularizedProblem& prob) {
  if (w.size() != prob.dim()) {
    throw std::invalid_argument("weight vector length does not match d");
  }
  const AdaptConfig& config = prob.config();
  const Matrix& phi = prob.source().data();
  Vector grad = 2.0 * (phi.transpose() * (phi * w - prob.labels()));
  switch (config.mode) {
    case Mode::kUnregularized:
      return grad;
    case Mode::kL2:
      return grad + 2.0 * config.l2_coefficient * w;
    case Mode::kLabelAlign:
      break;
  }
  grad -= 2.0 * tail_product(w, prob.source_spectrum(), config.source_cutoff);
  grad += 2.0 * config.lambda *
          tail_product(w, prob.target_spectrum(), config.target_cutoff);
  return grad;
}

SymmetricSolve solve_symmetric_psd(const Matrix& m, const Vector& b,
                                   bool allow_inconsistent,
                                   const std::string& message) {
  const Index d = m.rows();
  if (m.cols() != d || b.size() != d) {
    throw std::invalid_argument("system dimensions do not agree");
  }
  const double rank_tolerance = static_cast<double>(d) * kRankEpsilon;

  Eigen::LDLT<Matrix> ldlt(m);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Vector pivots = ldlt.vectorD().cwiseAbs();
    const double top = pivots.maxCoeff();
    if (top > 0.0 && pivots.minCoeff() > top * rank_tolerance) {
      Vector w = ldlt.solve(b);
      if (w.allFinite()) return {std::move(w), false, static_cast<int>(d)};
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the system matrix did not converge");
  }
  const Vector& eigenvalues = solver.eigenvalues();
  const double top = eigenvalues.cwiseAbs().maxCoeff();
  const double threshold = top * rank_tolerance;
  const Vector coefficients = solver.eigenvectors().transpose() * b;
  Vector scaled = Vector::Zero(d);
  double dropped_sq = 0.0;
  int rank = 0;
  for (Index i = 0; i < d; ++i) {
    if (top > 0.0 && eigenvalues(i) > threshold) {
      scaled(i) = coefficients(i) / eigenvalues(i);
      ++rank;
    } else {
      dropped_sq += coefficients(i) * coefficients(i);
    }
  }
  if (!allow_inconsistent &&
      std::sqrt(dropped_sq) > kConsistencyTolerance * b.norm()) {
    throw SingularSystemError(message);
  }
  return {solver.eigenvectors() * scaled, true, rank};
}

namespace {

void check_divergence(double value, int iteration, double alpha) {
  if (std::isfinite(value) && value <= kDivergenceLimit) return;
  std::ostringstream msg;
  msg << "gradient descent diverged at iteration " << iteration
      << " (objective " << value << ", step size " << alpha
      << "); use a smaller step size";
  throw DivergenceError(msg.str());
}

double choose_step(const RegularizedProblem& prob, const Matrix& m,
                   const Vector* known_eigenvalues) {
  const StepSize& step = prob.config().step;
  switch (step.rule) {
    case StepSize::Rule::kFixed:
      return step.value;
    case StepSize::Rule::kInverseTwoSigma: {
      const double sigma = prob.source_spectrum().singular_values(0);
      return sigma > 0.0 ? 1.0 / (2.0 * sigma) : 0.0;
    }
    case StepSize::Rule::kAuto:
      break;
  }
  double top = 0.0;
  if (known_eigenvalues != nullptr) {
    top = known_eigenvalues->maxCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigenvalue computation did not converge");
    }
    top = solver.eigenvalues().maxCoeff();
  }
  return top > 0.0 ? 1.0 / (2.0 * top) : 0.0;
}

void run_iterative(const Matrix& m, const Vector& b, double c, double alpha,
                   int iterations, SolutionReport& report) {
  Vector w = Vector::Zero(b.size());
  Vector mw = Vector::Zero(b.size());
  for (int it = 0; it < iterations; ++it) {
    w -= (2.0 * alpha) * (mw - b);
    mw.noalias() = m * w;
    const double value = quadratic_value(w, mw, b, c);
    check_divergence(value, it + 1, alpha);
    report.objective_trace.push_back(value);
  }
  report.weights = std::move(w);
}

// Fraction 1 - (1 - x)^t of the way to the stationary coordinate, divided by
// x, so that it stays exact as x -> 0 (where it tends to t).
double gd_gain(double x, int t) {
  if (x == 0.0) return static_cast<double>(t);
  if (x > -1.0 && x < 1.0) {
    return -std::expm1(static_cast<double>(t) * std::log1p(-x)) / x;
  }
  return (1.0 - std::pow(1.0 - x, t)) / x;
}

// In the eigenbasis of M the update decouples: each coordinate follows
// c_i(t) = 2 alpha beta_i gd_gain(2 alpha mu_i, t).
void run_spectral(const Matrix& q, const Vector& mu, const Vector& b, double c,
                  double alpha, int iterations, SolutionReport& report) {
  const Vector beta = q.transpose() * b;
  const Index d = b.size();
  Vector coords(d);
  auto coords_at = [&](int t) {
    for (Index i = 0; i < d; ++i) {
      coords(i) = 2.0 * alpha * beta(i) * gd_gain(2.0 * alpha * mu(i), t);
    }
  };
  for (int it = 1; it <= iterations; ++it) {
    coords_at(it);
    double value = c;
    for (Index i = 0; i < d; ++i) {
      value += mu(i) * coords(i) * coords(i) - 2.0 * beta(i) * coords(i);
    }
    check_divergence(value, it, alpha);
    report.objective_trace.push_back(value);
  }
  report.weights = q * coords;
}

}  // namespace

SolutionReport fit_gd(const RegularizedProblem& prob) {
  return fit_gd(prob, prob.system_matrix());
}

SolutionReport fit_gd(const RegularizedProblem& prob, const Matrix& m) {
  const AdaptConfig& config = prob.config();
  if (m.rows() != prob.dim() || m.cols() != prob.dim()) {
    throw std::invalid_argument("system matrix must be d x d");
  }
  const Vector& b = prob.source_moment();
  const double c = prob.label_norm_sq();
  const Index d = prob.dim();

  bool spectral = config.gd_backend == GdBackend::kSpectral;
  if (config.gd_backend == GdBackend::kAuto) {
    spectral = static_cast<Index>(config.iterations) > 2 * d;
  }

  SolutionReport report;
  report.objective_trace.reserve(static_cast<std::size_t>(config.iterations));
  if (spectral) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition of the system matrix did not converge");
    }
    report.step_size = choose_step(prob, m, &solver.eigenvalues());
    run_spectral(solver.eigenvectors(), solver.eigenvalues(), b, c,
                 report.step_size, config.iterations, report);
  } else {
    report.step_size = choose_step(prob, m, nullptr);
    run_iterative(m, b, c, report.step_size, config.iterations, report);
  }
  return report;
}

SolutionReport fit_closed_form(const RegularizedProblem& prob) {
  return fit_closed_form(prob, prob.system_matrix());
}

SolutionReport fit_closed_form(const RegularizedProblem& prob,
                               const Matrix& system) {
  const bool unregularized = prob.config().mode == Mode::kUnregularized;
  SymmetricSolve solve = solve_symmetric_psd(
      system, prob.source_moment(), unregularized,
      unregularized ? "source Gram matrix singular" : kSingularRegularized);
  SolutionReport report;
  report.minimum_norm = solve.minimum_norm;
  report.weights = std::move(solve.solution);
  const Vector mw = system * report.weights;
  report.objective_trace.push_back(quadratic_value(
      report.weights, mw, prob.source_moment(), prob.label_norm_sq()));
  return report;
}

Vector target_oracle(const DesignMatrix& target, const Vector& target_labels) {
  if (target_labels.size() != target.rows()) {
    throw std::invalid_argument("target label count does not match rows");
  }
  const Matrix s = gram(target);
  const SpectralDecomposition sd = decompose_gram(s, target.rows(), target.cols());
  if (sd.rank < sd.d) {
    throw SingularSystemError("target Gram matrix is singular");
  }
  return solve_symmetric_psd(s, target.data().transpose() * target_labels,
                             false, "target Gram matrix is singular")
      .solution;
}

LeastSquaresFit source_least_squares(const DesignMatrix& source,
                                     const Vector& y, Mode mode,
                                     double l2_coefficient) {
  if (y.size() != source.rows()) {
    throw std::invalid_argument("label count does not match source rows");
  }
  if (mode == Mode::kLabelAlign) {
    throw std::invalid_argument("source_least_squares takes unregularized or l2");
  }
  Matrix s = gram(source);
  if (mode == Mode::kL2) {
    if (!(l2_coefficient >= 0.0)) {
      throw std::invalid_argument("l2 coefficient must be >= 0");
    }
    s.diagonal().array() += l2_coefficient;
  }
  SymmetricSolve solve = solve_symmetric_psd(
      s, source.data().transpose() * y, true, "source Gram matrix singular");
  return {std::move(solve.solution), solve.minimum_norm};
}

namespace {

struct BoundInputs {
  double moment_gap;
  double lambda_min;
};

BoundInputs bound_inputs(const RegularizedProblem& prob,
                         const Vector& target_labels) {
  if (target_labels.size() != prob.target().rows()) {
    throw std::invalid_argument("target label count does not match rows");
  }
  const SpectralDecomposition& tgt = prob.target_spectrum();
  if (tgt.rank < tgt.d) {
    throw SingularSystemError("target Gram matrix is singular");
  }
  const double smallest = tgt.singular_values(tgt.d - 1);
  const Vector target_moment = prob.target().data().transpose() * target_labels;
  return {(prob.source_moment() - target_moment).norm(), smallest * smallest};
}

}  // namespace

BoundPair regularized_solution_bound(const RegularizedProblem& prob,
                                     const Vector& w_hat,
                                     const Vector& w_target,
                                     const Vector& target_labels) {
  const AdaptConfig& config = prob.config();
  if (config.mode != Mode::kLabelAlign || config.lambda != 1.0) {
    throw std::invalid_argument(
        "the regularized-solution bound holds for label alignment with lambda = 1");
  }
  const BoundInputs in = bound_inputs(prob, target_labels);
  const Matrix gap =
      prob.source_spectrum().truncated_gram(config.source_cutoff) -
      prob.target_spectrum().truncated_gram(config.target_cutoff);
  const double gram_gap = spectral_norm_symmetric(0.5 * (gap + gap.transpose()));
  return {(w_hat - w_target).norm(),
          (in.moment_gap + w_hat.norm() * gram_gap) / in.lambda_min};
}

BoundPair source_solution_bound(const RegularizedProblem& prob,
                                const Vector& w_source,
                                const Vector& w_target,
                                const Vector& target_labels) {
  const BoundInputs in = bound_inputs(prob, target_labels);
  const double gram_gap =
      spectral_norm_symmetric(prob.source_gram() - prob.target_gram());
  return {(w_source - w_target).norm(),
          (in.moment_gap + w_source.norm() * gram_gap) / in.lambda_min};
}

RewriteCheck rewrite_check(const Vector& w, const DesignMatrix& source,
                           const Vector& y) {
  const SpectralDecomposition sd = decompose(source);
  const Vector wv = coordinates(w, sd);
  const Vector yu = label_components(source, y, sd);
  RewriteCheck out;
  out.direct = (source.data() * w - y).squaredNorm();
  double in_span = 0.0;
  for (int i = 0; i < sd.rank; ++i) {
    const double diff = sd.singular_values(i) * wv(i) - yu(i);
    in_span += diff * diff;
  }
  out.reformulated = in_span + (y.squaredNorm() - yu.squaredNorm());
  return out;
}

}  // namespace labalign
