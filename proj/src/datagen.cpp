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

#include "labalign/datagen.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "labalign/rng.hpp"

namespace labalign {
namespace {

constexpr std::uint64_t kSourceStream = 1;
constexpr std::uint64_t kTargetStream = 2;

Eigen::Matrix2d rotation(double degrees) {
  const double radians = degrees * std::numbers::pi / 180.0;
  Eigen::Matrix2d r;
  r << std::cos(radians), -std::sin(radians),
       std::sin(radians), std::cos(radians);
  return r;
}

struct Draw {
  Matrix points;  // n x 2, pre-rotation
  Vector signs;
};

Draw draw_gaussian(Rng& rng, Index n, double sigma_major, double sigma_minor) {
  Draw out{Matrix(n, 2), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    double first = 0.0;
    do {
      first = sigma_major * rng.normal();
    } while (first == 0.0);
    out.points(i, 0) = first;
    out.points(i, 1) = sigma_minor * rng.normal();
    out.signs(i) = first > 0.0 ? 1.0 : -1.0;
  }
  return out;
}

Vector first_left_singular_vector(const DesignMatrix& design) {
  const SpectralDecomposition sd = decompose(design);
  return design.data() * sd.right_vectors.col(0) / sd.singular_values(0);
}

LabeledDomain make_domain(const Draw& draw, double degrees, TaskKind task) {
  const Matrix rotated = draw.points * rotation(degrees).transpose();
  DesignMatrix design = DesignMatrix::with_bias(rotated);
  Vector labels = task == TaskKind::kClassification
                      ? draw.signs
                      : first_left_singular_vector(design);
  return {std::move(design), std::move(labels)};
}

}  // namespace

void SyntheticSpec::validate() const {
  if (!(sigma_major > sigma_minor && sigma_minor > 0.0)) {
    throw std::invalid_argument("anisotropy needs sigma_major > sigma_minor > 0");
  }
  if (n_source < 2 || n_target < 2) {
    throw std::invalid_argument("each domain needs at least 2 samples");
  }
  if (!std::isfinite(rotation_deg)) {
    throw std::invalid_argument("rotation must be finite");
  }
}

SyntheticTask synth_task(const SyntheticSpec& spec) {
  spec.validate();
  Rng source_rng(derive_seed(spec.seed, kSourceStream));
  Rng target_rng(derive_seed(spec.seed, kTargetStream));
  const Draw source =
      draw_gaussian(source_rng, spec.n_source, spec.sigma_major, spec.sigma_minor);
  const Draw target =
      draw_gaussian(target_rng, spec.n_target, spec.sigma_major, spec.sigma_minor);
  return {make_domain(source, 0.0, spec.task),
          make_domain(target, spec.rotation_deg, spec.task)};
}

DesignMatrix rotate_features(const DesignMatrix& design, double degrees) {
  if (!design.has_bias() || design.cols() != 3) {
    throw std::invalid_argument("expected a 2-feature design with bias");
  }
  Matrix data = design.data();
  data.leftCols(2) = design.data().leftCols(2) * rotation(degrees).transpose();
  return DesignMatrix(std::move(data), true);
}

LabeledDomain correlated_features_toy(double s, std::uint64_t seed, Index n,
                                      Index d, Index correlated) {
  if (!(s >= 0.0)) throw std::invalid_argument("noise level s must be >= 0");
  if (n < 1 || d < 1 || correlated < 0 || correlated > d) {
    throw std::invalid_argument("invalid toy dimensions");
  }
  Rng rng(seed);
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = rng.normal();
  y /= y.norm();
  Matrix phi(n, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) {
      phi(i, j) = j < correlated ? y(i) + s * rng.normal() : rng.normal();
    }
    phi.col(j) /= phi.col(j).norm();
  }
  return {DesignMatrix(std::move(phi), false), std::move(y)};
}

}  // namespace labalign
