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

#include "labalign/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "labalign/error.hpp"

namespace labalign {

DesignMatrix::DesignMatrix(Matrix data, bool has_bias)
    : data_(std::move(data)), has_bias_(has_bias) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw std::invalid_argument("design matrix must be at least 1x1");
  }
  if (!data_.allFinite()) {
    throw std::invalid_argument("design matrix has non-finite entries");
  }
  if (has_bias_ && !(data_.col(data_.cols() - 1).array() == 1.0).all()) {
    throw std::invalid_argument("bias column must be exactly 1");
  }
}

DesignMatrix DesignMatrix::with_bias(const Matrix& features) {
  Matrix data(features.rows(), features.cols() + 1);
  data.leftCols(features.cols()) = features;
  data.col(features.cols()).setOnes();
  return DesignMatrix(std::move(data), true);
}

Matrix SpectralDecomposition::truncated_gram(int k) const {
  const Index keep = std::clamp<Index>(k, 0, d);
  const auto basis = right_vectors.leftCols(keep);
  const Vector weights = singular_values.head(keep).array().square();
  return basis * weights.asDiagonal() * basis.transpose();
}

Matrix SpectralDecomposition::residual_gram(int k) const {
  const Index skip = std::clamp<Index>(k, 0, d);
  const auto basis = right_vectors.rightCols(d - skip);
  const Vector weights = singular_values.tail(d - skip).array().square();
  return basis * weights.asDiagonal() * basis.transpose();
}

Matrix SpectralDecomposition::reconstructed_gram() const {
  return truncated_gram(static_cast<int>(d));
}

Matrix gram(const DesignMatrix& m) {
  Matrix g(m.cols(), m.cols());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(m.data().transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

SpectralDecomposition decompose_gram(const Matrix& gram, Index n, Index d) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the Gram matrix did not converge");
  }
  SpectralDecomposition sd;
  sd.n = n;
  sd.d = d;
  sd.singular_values.resize(d);
  sd.right_vectors.resize(d, d);
  // Eigen returns ascending eigenvalues.
  for (Index i = 0; i < d; ++i) {
    const Index src = d - 1 - i;
    sd.singular_values(i) = std::sqrt(std::max(solver.eigenvalues()(src), 0.0));
    auto column = sd.right_vectors.col(i);
    column = solver.eigenvectors().col(src);
    Index pivot = 0;
    column.cwiseAbs().maxCoeff(&pivot);
    if (column(pivot) < 0) column = -column;
  }
  sd.rank = numerical_rank(sd.singular_values, n, d);
  return sd;
}

SpectralDecomposition decompose(const DesignMatrix& m) {
  return decompose_gram(gram(m), m.rows(), m.cols());
}

int numerical_rank(const Vector& singular_values, Index n, Index d) {
  if (singular_values.size() == 0) return 0;
  const double top = singular_values.maxCoeff();
  if (top <= 0.0) return 0;
  const double threshold =
      top * static_cast<double>(std::max(n, d)) * kRankEpsilon;
  return static_cast<int>((singular_values.array() > threshold).count());
}

Vector label_components(const DesignMatrix& m, const Vector& y,
                        const SpectralDecomposition& sd) {
  if (y.size() != m.rows()) {
    throw std::invalid_argument("label vector length " +
                                std::to_string(y.size()) +
                                " does not match design rows " +
                                std::to_string(m.rows()));
  }
  const Vector moment = m.data().transpose() * y;
  const Vector projected =
      sd.right_vectors.leftCols(sd.rank).transpose() * moment;
  return projected.cwiseQuotient(sd.singular_values.head(sd.rank));
}

Vector coordinates(const Vector& w, const SpectralDecomposition& sd) {
  if (w.size() != sd.d) {
    throw std::invalid_argument("weight vector length does not match d");
  }
  return sd.right_vectors.transpose() * w;
}

double spectral_norm_symmetric(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace labalign
