// Copyright 2026 The protodisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "protodisc/vector.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "protodisc/errors.hpp"
#include "test_util.hpp"

namespace protodisc {
namespace {

TEST(VectorTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Vector(std::vector<double>{}), DimensionError);
  EXPECT_THROW(Vector({1.0, std::numeric_limits<double>::quiet_NaN()}), NonFiniteError);
  EXPECT_THROW(Vector({std::numeric_limits<double>::infinity()}), NonFiniteError);
}

TEST(VectorTest, Arithmetic) {
  const Vector a{1.0, 2.0}, b{3.0, -1.0};
  EXPECT_EQ(a + b, Vector({4.0, 1.0}));
  EXPECT_EQ(a - b, Vector({-2.0, 3.0}));
  EXPECT_EQ(2.0 * a, Vector({2.0, 4.0}));
  EXPECT_DOUBLE_EQ(dot(a, b), 1.0);
}

TEST(EuclideanDistanceTest, HandValues) {
  EXPECT_EQ(euclidean_distance(Vector{0.0, 0.0}, Vector{0.0, 0.0}), 0.0);
  EXPECT_EQ(euclidean_distance(Vector{0.0, 0.0}, Vector{3.0, 4.0}), 5.0);
}

TEST(EuclideanDistanceTest, MatchesLongDoubleOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testing::random_vector(rng, 16, 3.0);
    const auto b = testing::random_vector(rng, 16, 3.0);
    long double acc = 0.0L;
    for (std::size_t j = 0; j < 16; ++j) {
      const long double d = static_cast<long double>(a[j]) - b[j];
      acc += d * d;
    }
    EXPECT_NEAR(euclidean_distance(a, b), static_cast<double>(std::sqrt(acc)), 1e-12);
  }
}

TEST(EuclideanDistanceTest, DimensionMismatch) {
  EXPECT_THROW(euclidean_distance(Vector{1.0}, Vector{1.0, 2.0}), DimensionError);
  EXPECT_THROW(dot(Vector{1.0}, Vector{1.0, 2.0}), DimensionError);
}

TEST(CosineSimilarityTest, HandValues) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1.0, 0.0}, Vector{1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1.0, 0.0}, Vector{0.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Vector{1.0, 0.0}, Vector{-2.0, 0.0}), -1.0);
}

TEST(CosineSimilarityTest, ZeroNormIsAnError) {
  EXPECT_THROW(cosine_similarity(Vector{0.0, 0.0}, Vector{1.0, 0.0}), ZeroNormError);
  EXPECT_THROW(cosine_similarity(Vector{1.0, 0.0}, Vector{0.0, 0.0}), ZeroNormError);
}

TEST(CosineSimilarityTest, StaysInRange) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_vector(rng, 4);
    const double c = cosine_similarity(a, 1e-3 * a);
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
  }
}

TEST(SoftmaxTest, Uniform) {
  const std::vector<double> s{0.0, 0.0, 0.0};
  for (double p : softmax(s)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(SoftmaxTest, AnalyticRatio) {
  for (double c : {-5.0, 0.0, 7.25}) {
    const std::vector<double> s{c, c + std::log(2.0)};
    const auto p = softmax(s);
    EXPECT_NEAR(p[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-15);
  }
}

TEST(SoftmaxTest, LargeScoresDoNotOverflow) {
  const std::vector<double> s{1000.0, 0.0};
  const auto p = softmax(s);
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(p[0]) && std::isfinite(p[1]));
}

TEST(SoftmaxTest, ShiftInvariant) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s(5), t(5);
    const double c = rng.uniform(-50.0, 50.0);
    for (std::size_t k = 0; k < 5; ++k) {
      s[k] = rng.normal();
      t[k] = s[k] + c;
    }
    const auto p = softmax(s), q = softmax(t);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}

TEST(SoftmaxTest, EmptyIsAnError) { EXPECT_THROW(softmax(std::vector<double>{}), EmptyInputError); }

TEST(MeanTest, FixedOrderAverage) {
  const std::vector<Vector> pts{Vector{0.0, 0.0}, Vector{2.0, 2.0}};
  EXPECT_EQ(mean(pts), Vector({1.0, 1.0}));
  EXPECT_THROW(mean(std::vector<Vector>{}), EmptyInputError);
}

TEST(MatrixTest, RowMajorAccess) {
  Matrix m{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
}

}  // namespace
}  // namespace protodisc
