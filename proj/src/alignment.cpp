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

#include "labalign/alignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "labalign/error.hpp"

namespace labalign {

AlignmentProfile alignment_profile(const DesignMatrix& m, const Vector& y) {
  return alignment_profile(m, y, decompose(m));
}

AlignmentProfile alignment_profile(const DesignMatrix& m, const Vector& y,
                                   const SpectralDecomposition& sd) {
  if (sd.rank == 0) throw DataError("degenerate design matrix");
  AlignmentProfile p;
  p.components = label_components(m, y, sd);
  p.total_energy = p.components.squaredNorm();
  p.label_norm_sq = y.squaredNorm();
  p.rank = sd.rank;
  p.n = m.rows();
  p.d = m.cols();
  return p;
}

int k_epsilon(const AlignmentProfile& p, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1)");
  }
  if (p.total_energy <= 0.0) {
    throw DataError("label orthogonal to feature span");
  }
  const Index r = p.components.size();
  // tail[k] = sum_{i >= k} c_i^2 accumulated from the back.
  Vector tail(r + 1);
  tail(r) = 0.0;
  for (Index i = r - 1; i >= 0; --i) {
    tail(i) = tail(i + 1) + p.components(i) * p.components(i);
  }
  const double limit = eps * std::sqrt(p.total_energy);
  for (Index k = 0; k <= r; ++k) {
    if (std::sqrt(tail(k)) < limit) return static_cast<int>(k);
  }
  return static_cast<int>(r);
}

double projection_energy(const AlignmentProfile& p, int k) {
  if (k < 0 || k > p.components.size()) {
    throw std::invalid_argument("projection cutoff outside [0, rank]");
  }
  if (p.label_norm_sq <= 0.0) {
    throw DataError("label vector has zero norm");
  }
  const double captured = p.components.head(k).squaredNorm();
  return std::min(1.0, std::sqrt(captured / p.label_norm_sq));
}

std::optional<double> emergence_lower_bound(const EmergenceParams& p) {
  const double delta = p.delta;
  const double k_hat = p.k_hat;
  const double d = p.d;
  if (!(delta > 0.0 && delta < 0.2)) return std::nullopt;
  if (p.k_hat < 1 || p.d < p.k_hat) return std::nullopt;
  // The quadratic -15 delta^2 - 2 delta + 1 stays positive on (0, 0.2).
  const double k_hat_min = 16.0 * delta * delta / (-15.0 * delta * delta - 2.0 * delta + 1.0);
  if (!(k_hat > k_hat_min)) return std::nullopt;
  const double spill = 16.0 * delta * delta * (k_hat - 1.0);
  if (!(d > spill)) return std::nullopt;
  const double numerator = k_hat * (1.0 - delta) * (1.0 - delta) - spill;
  return std::sqrt(numerator / (d - spill));
}

MeasuredDelta measured_delta(const DesignMatrix& m, const Vector& y,
                             std::span<const Index> correlated,
                             double threshold) {
  const double y_norm = y.norm();
  if (y_norm <= 0.0) throw DataError("label vector has zero norm");
  const Vector unit_y = y / y_norm;
  Vector overlap(m.cols());
  for (Index j = 0; j < m.cols(); ++j) {
    const double norm = m.data().col(j).norm();
    overlap(j) = norm > 0.0 ? std::abs(m.data().col(j).dot(unit_y)) / norm : 0.0;
  }
  MeasuredDelta out;
  double worst = std::numeric_limits<double>::infinity();
  for (const Index j : correlated) {
    if (j < 0 || j >= m.cols()) {
      throw std::invalid_argument("correlated column index out of range");
    }
    worst = std::min(worst, overlap(j));
  }
  out.delta = correlated.empty() ? 1.0 : 1.0 - worst;
  out.k_hat = static_cast<int>((overlap.array() > 1.0 - threshold).count());
  return out;
}

}  // namespace labalign
