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

#include <doctest.h>

#include <numeric>

#include "labalign/alignment.hpp"
#include "labalign/datagen.hpp"
#include "labalign/error.hpp"
#include "support.hpp"

using namespace labalign;
using testing::random_matrix;
using testing::random_vector;

namespace {

AlignmentProfile profile_of(std::vector<double> components) {
  AlignmentProfile p;
  p.components = Eigen::Map<Vector>(components.data(), components.size());
  p.total_energy = p.components.squaredNorm();
  p.label_norm_sq = p.total_energy;
  p.rank = static_cast<int>(components.size());
  p.n = p.rank;
  p.d = p.rank;
  return p;
}

// Literal reading of the tail condition, summed front to back.
int naive_k_epsilon(const Vector& c, double eps) {
  const double total = c.squaredNorm();
  for (Index k = 0; k <= c.size(); ++k) {
    double tail = 0.0;
    for (Index i = k; i < c.size(); ++i) tail += c(i) * c(i);
    if (std::sqrt(tail) < eps * std::sqrt(total)) return static_cast<int>(k);
  }
  return static_cast<int>(c.size());
}

}  // namespace

TEST_SUITE("alignment") {

TEST_CASE("profile of the identity design") {
  Vector y(2);
  y << 1, 1;
  const AlignmentProfile p = alignment_profile(DesignMatrix(Matrix::Identity(2, 2), false), y);
  CHECK(p.components.cwiseAbs().isApprox(Vector::Ones(2)));
  CHECK(p.total_energy == doctest::Approx(2.0));
  CHECK(p.rank == 2);
}

TEST_CASE("label built from the first left singular vector") {
  Rng rng(21);
  const DesignMatrix m(random_matrix(rng, 40, 5), false);
  const SpectralDecomposition sd = decompose(m);
  const Vector u1 = m.data() * sd.right_vectors.col(0) / sd.singular_values(0);
  const AlignmentProfile p = alignment_profile(m, u1, sd);
  CHECK(std::abs(p.components(0)) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(p.components.tail(4).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(k_epsilon(p, 0.1) == 1);
  CHECK(projection_energy(p, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("degenerate and orthogonal inputs") {
  CHECK_THROWS_WITH_AS(alignment_profile(DesignMatrix(Matrix::Zero(3, 2), false),
                                         Vector::Ones(3)),
                       "degenerate design matrix", DataError);
  Matrix phi = Matrix::Zero(3, 1);
  phi(0, 0) = 1;
  Vector y(3);
  y << 0, 1, 1;
  const AlignmentProfile p = alignment_profile(DesignMatrix(phi, false), y);
  CHECK_THROWS_WITH_AS(k_epsilon(p, 0.1), "label orthogonal to feature span", DataError);
  CHECK_THROWS_AS(k_epsilon(profile_of({1.0}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(k_epsilon(profile_of({1.0}), 1.0), std::invalid_argument);
}

TEST_CASE("k epsilon hand examples") {
  CHECK(k_epsilon(profile_of({1, 0, 0}), 0.1) == 1);
  CHECK(k_epsilon(profile_of({3, 4}), 0.9) == 1);
  CHECK(k_epsilon(profile_of({3, 4}), 0.5) == 2);
  CHECK(k_epsilon(profile_of({0, 0, 2}), 0.5) == 3);
}

TEST_CASE("k epsilon agrees with a front-to-back summation and is monotone") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Index r = testing::random_int(rng, 1, 30);
    Vector c = random_vector(rng, r);
    for (Index i = 0; i < r; ++i) c(i) *= std::pow(0.7, static_cast<double>(i));
    AlignmentProfile p = profile_of(std::vector<double>(c.data(), c.data() + r));
    int previous = std::numeric_limits<int>::max();
    for (const double eps : {0.01, 0.05, 0.1, 0.3, 0.6, 0.9}) {
      const int k = k_epsilon(p, eps);
      CHECK(k == naive_k_epsilon(c, eps));
      CHECK(k <= previous);
      previous = k;
    }
  }
}

TEST_CASE("projection energy") {
  const AlignmentProfile p = profile_of({3, 4});
  CHECK(projection_energy(p, 0) == 0.0);
  CHECK(projection_energy(p, 1) == doctest::Approx(0.6));
  CHECK(projection_energy(p, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(projection_energy(p, 3), std::invalid_argument);

  Rng rng(23);
  const DesignMatrix m(random_matrix(rng, 30, 6), false);
  const AlignmentProfile q = alignment_profile(m, random_vector(rng, 30));
  double previous = 0.0;
  for (int k = 0; k <= q.rank; ++k) {
    const double e = projection_energy(q, k);
    CHECK(e >= previous - 1e-15);
    CHECK(e <= 1.0);
    previous = e;
  }
}

TEST_CASE("statistics are invariant to row order and label sign") {
  Rng rng(24);
  const Matrix phi = random_matrix(rng, 60, 8);
  const Vector y = phi * random_vector(rng, 8) + 0.3 * random_vector(rng, 60);
  std::vector<Index> order(60);
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  Matrix phi_p(60, 8);
  Vector y_p(60);
  for (Index i = 0; i < 60; ++i) {
    phi_p.row(i) = phi.row(order[i]);
    y_p(i) = y(order[i]);
  }
  const AlignmentProfile a = alignment_profile(DesignMatrix(phi, false), y);
  const AlignmentProfile b = alignment_profile(DesignMatrix(phi_p, false), y_p);
  const AlignmentProfile c = alignment_profile(DesignMatrix(phi, false), -y);
  for (const double eps : {0.05, 0.1, 0.5}) {
    CHECK(k_epsilon(a, eps) == k_epsilon(b, eps));
    CHECK(k_epsilon(a, eps) == k_epsilon(c, eps));
  }
  for (int k = 0; k <= a.rank; ++k) {
    CHECK(projection_energy(a, k) == doctest::Approx(projection_energy(b, k)).epsilon(1e-10));
    CHECK(projection_energy(a, k) == doctest::Approx(projection_energy(c, k)).epsilon(1e-12));
  }
}

TEST_CASE("emergence bound formula") {
  // sqrt((9 * 0.95^2 - 16 * 0.05^2 * 8) / (10 - 16 * 0.05^2 * 8))
  //   = sqrt((8.1225 - 0.32) / (10 - 0.32)) = sqrt(7.8025 / 9.68)
  const auto b = emergence_lower_bound({9, 0.05, 10, 0.0});
  REQUIRE(b.has_value());
  CHECK(*b == doctest::Approx(0.89780).epsilon(1e-4));
  CHECK(*b == doctest::Approx(std::sqrt(7.8025 / 9.68)).epsilon(1e-12));

  CHECK_FALSE(emergence_lower_bound({9, 0.3, 10, 0.0}).has_value());
  CHECK_FALSE(emergence_lower_bound({9, 0.0, 10, 0.0}).has_value());
  CHECK_FALSE(emergence_lower_bound({11, 0.05, 10, 0.0}).has_value());
  // k_hat = 1 needs 1 > 16 delta^2 / (1 - 2 delta - 15 delta^2).
  CHECK(emergence_lower_bound({1, 0.1, 10, 0.0}).has_value());
  CHECK_FALSE(emergence_lower_bound({1, 0.199, 10, 0.0}).has_value());

  double previous = 0.0;
  for (const double delta : {0.1, 0.01, 1e-4, 1e-8}) {
    const double v = *emergence_lower_bound({10, delta, 10, 0.0});
    CHECK(v > previous);
    previous = v;
  }
  CHECK(previous == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("measured delta") {
  Vector y(4);
  y << 1, 2, 0, 0;
  Matrix phi(4, 3);
  phi.col(0) = 3.0 * y;       // parallel to y
  phi.col(1) << 0, 0, 1, 0;   // orthogonal to y
  phi.col(2) << 1, 2, 1, 0;
  const DesignMatrix m(phi, false);
  const std::vector<Index> first{0};
  const MeasuredDelta a = measured_delta(m, y, first, 0.5);
  CHECK(a.delta == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(a.k_hat == 2);  // column 2 overlaps by sqrt(5/6) ~ 0.913
  CHECK(measured_delta(m, y, first, 0.999).k_hat == 2);
  const std::vector<Index> both{0, 2};
  CHECK(measured_delta(m, y, both, 0.1).delta ==
        doctest::Approx(1.0 - std::sqrt(5.0 / 6.0)).epsilon(1e-12));
  CHECK(measured_delta(m, y, first, 0.01).k_hat == 1);
}

TEST_CASE("emergence bound holds on generated toys") {
  const std::vector<Index> correlated{0, 1, 2, 3, 4, 5, 6, 7, 8};
  int applicable = 0;
  for (const double s : {0.001, 0.003, 0.005, 0.01, 0.02}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const LabeledDomain toy = correlated_features_toy(s, seed);
      const double delta = measured_delta(toy.design, toy.labels, correlated, 0.0).delta;
      const double threshold = std::nextafter(delta, 1.0);
      const MeasuredDelta md = measured_delta(toy.design, toy.labels, correlated, threshold);
      const auto bound = emergence_lower_bound({md.k_hat, threshold, 10, s});
      if (!bound) continue;
      ++applicable;
      const AlignmentProfile p = alignment_profile(toy.design, toy.labels);
      CHECK(projection_energy(p, 10 - md.k_hat + 1) >= *bound);
    }
  }
  CHECK(applicable == 25);
}

TEST_CASE("toy at s = 0.01") {
  const LabeledDomain toy = correlated_features_toy(0.01, 0);
  const std::vector<Index> correlated{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const double delta = measured_delta(toy.design, toy.labels, correlated, 0.0).delta;
  // Noise of variance s^2 per entry on a unit-norm label adds n s^2 = 0.1 to
  // each squared column norm, so overlaps sit near 1/sqrt(1.1).
  CHECK(delta == doctest::Approx(1.0 - 1.0 / std::sqrt(1.1)).epsilon(0.2));
  const AlignmentProfile p = alignment_profile(toy.design, toy.labels);
  const auto bound = emergence_lower_bound({9, std::nextafter(delta, 1.0), 10, 0.01});
  REQUIRE(bound.has_value());
  CHECK(projection_energy(p, 2) >= *bound);
  CHECK(projection_energy(p, 2) >= 0.9);
}

}
