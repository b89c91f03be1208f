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

#include <optional>
#include <span>

#include "labalign/spectral.hpp"

namespace labalign {

/// Label components in the left singular basis, restricted to the numerical
/// rank of the design.
struct AlignmentProfile {
  Vector components;          // y^U_1 .. y^U_r
  double total_energy = 0.0;  // sum of squared components
  double label_norm_sq = 0.0; // ||y||^2, including the out-of-span part
  int rank = 0;
  Index n = 0;
  Index d = 0;
};

/// Throws DataError("degenerate design matrix") when the design has rank 0.
AlignmentProfile alignment_profile(const DesignMatrix& m, const Vector& y);
AlignmentProfile alignment_profile(const DesignMatrix& m, const Vector& y,
                                   const SpectralDecomposition& sd);

/// Smallest k in [0, r] whose tail energy satisfies
/// sqrt(sum_{i>k} c_i^2) < eps * sqrt(total). Throws DataError when the
/// label has no in-span energy and std::invalid_argument unless 0 < eps < 1.
int k_epsilon(const AlignmentProfile& p, double eps);

/// Fraction of ||y|| captured by the top-k left singular directions.
double projection_energy(const AlignmentProfile& p, int k);

struct EmergenceParams {
  int k_hat = 1;       // columns highly correlated with the label
  double delta = 0.1;  // every such column has |<column, y>| > 1 - delta
  int d = 1;
  double s = 0.0;      // noise level of the generating toy, informational
};

/// Lower bound on the norm of the projection of a unit label onto the top
/// d - k_hat + 1 left singular vectors of a column-normalized design, or
/// nullopt when the side conditions on delta, k_hat and d do not hold.
std::optional<double> emergence_lower_bound(const EmergenceParams& p);

struct MeasuredDelta {
  double delta = 0.0;
  int k_hat = 0;
};

/// Normalizes y and every column to unit norm, then reports
/// delta = 1 - min_{i in correlated} |<column_i, y>| and the number of columns
/// (over all d) with |<column_i, y>| > 1 - threshold.
MeasuredDelta measured_delta(const DesignMatrix& m, const Vector& y,
                             std::span<const Index> correlated,
                             double threshold);

}  // namespace labalign
