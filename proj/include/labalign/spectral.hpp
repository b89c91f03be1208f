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

#include <Eigen/Dense>

namespace labalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Single-precision machine epsilon used by the numerical-rank rule.
inline constexpr double kRankEpsilon = 1.19209e-07;

/// Feature matrix, one row per sample. When has_bias() the last column is the
/// constant-1 feature standing in for an intercept.
class DesignMatrix {
 public:
  /// Throws std::invalid_argument on empty input, non-finite entries, or a
  /// bias column that is not exactly 1.
  DesignMatrix(Matrix data, bool has_bias);

  /// Appends the constant bias column to `features`.
  static DesignMatrix with_bias(const Matrix& features);

  const Matrix& data() const { return data_; }
  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  bool has_bias() const { return has_bias_; }

 private:
  Matrix data_;
  bool has_bias_;
};

/// Descending singular values and right singular vectors of a design matrix,
/// obtained from the eigendecomposition of its Gram matrix.
struct SpectralDecomposition {
  Vector singular_values;  // length d, descending, nonnegative
  Matrix right_vectors;    // d x d, orthogonal, column i pairs with sigma_i
  int rank = 0;
  Index n = 0;
  Index d = 0;

  /// sum_{i < k} sigma_i^2 v_i v_i^T. k is clamped to [0, d].
  Matrix truncated_gram(int k) const;

  /// sum_{i >= k} sigma_i^2 v_i v_i^T, the part of the Gram matrix left after
  /// rank-k truncation.
  Matrix residual_gram(int k) const;

  /// V diag(sigma^2) V^T.
  Matrix reconstructed_gram() const;
};

/// Phi^T Phi, symmetrized.
Matrix gram(const DesignMatrix& m);

/// Throws NumericalError if the symmetric eigensolver does not converge.
SpectralDecomposition decompose(const DesignMatrix& m);

/// Same as decompose() for a precomputed Gram matrix of an n x d design.
SpectralDecomposition decompose_gram(const Matrix& gram, Index n, Index d);

/// Number of singular values strictly above sigma_1 * max(n, d) * 1.19209e-07.
int numerical_rank(const Vector& singular_values, Index n, Index d);

inline int numerical_rank(const SpectralDecomposition& sd, Index n, Index d) {
  return numerical_rank(sd.singular_values, n, d);
}

/// Components y^U_i = v_i^T (Phi^T y) / sigma_i for i < sd.rank. Uses
/// u_i = Phi v_i / sigma_i so the n x n left basis is never formed.
Vector label_components(const DesignMatrix& m, const Vector& y,
                        const SpectralDecomposition& sd);

/// V^T w.
Vector coordinates(const Vector& w, const SpectralDecomposition& sd);

/// Largest absolute eigenvalue of a symmetric matrix (its 2-norm).
double spectral_norm_symmetric(const Matrix& a);

}  // namespace labalign
