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

#include "labalign/spectral.hpp"

namespace labalign {

enum class TaskKind { kClassification, kRegression };

/// Two-dimensional anisotropic Gaussian scenario: the target domain is the
/// source distribution rotated by rotation_deg, labels rotating with it.
struct SyntheticSpec {
  Index n_source = 2000;
  Index n_target = 2000;
  double sigma_major = 1.5;
  double sigma_minor = 1.0;
  double rotation_deg = 45.0;
  std::uint64_t seed = 0;
  TaskKind task = TaskKind::kClassification;

  void validate() const;
};

struct LabeledDomain {
  DesignMatrix design;
  Vector labels;
};

struct SyntheticTask {
  LabeledDomain source;
  LabeledDomain target;
};

/// Classification labels are the sign of the pre-rotation first coordinate.
/// Regression labels are the first left singular vector of each realized
/// design (bias included). Both designs carry a trailing bias column.
SyntheticTask synth_task(const SyntheticSpec& spec);

/// Rotates the two feature columns of a synthetic design in place of a
/// regeneration. The bias column is untouched.
DesignMatrix rotate_features(const DesignMatrix& design, double degrees);

/// Label ~ N(0, I_n) normalized to unit norm; the first `correlated` columns
/// ~ N(y, s^2 I), the rest ~ N(0, I); every column normalized to unit norm.
/// No bias column.
LabeledDomain correlated_features_toy(double s, std::uint64_t seed,
                                      Index n = 1000, Index d = 10,
                                      Index correlated = 9);

}  // namespace labalign
