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

#include "protodisc/kmeans.hpp"

#include <gtest/gtest.h>

#include "protodisc/data_io.hpp"
#include "protodisc/errors.hpp"
#include "protodisc/evaluation.hpp"
#include "test_util.hpp"

namespace protodisc {
namespace {

TEST(KMeansTest, SeparatedDuplicates) {
  std::vector<Vector> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(Vector{0.0, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back(Vector{10.0, 10.0});
  const auto c = kmeans(pts, 2, 1);
  EXPECT_EQ(c.inertia, 0.0);
  std::vector<Vector> centers = c.centers;
  std::sort(centers.begin(), centers.end(),
            [](const Vector& a, const Vector& b) { return a[0] < b[0]; });
  EXPECT_EQ(centers[0], Vector({0.0, 0.0}));
  EXPECT_EQ(centers[1], Vector({10.0, 10.0}));
}

TEST(KMeansTest, SingleClusterIsTheMean) {
  Rng rng(3);
  const auto pts = testing::random_vectors(rng, 40, 3);
  const auto c = kmeans(pts, 1, 9);
  const auto m = mean(pts);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(c.centers[0][j], m[j], 1e-12);
}

TEST(KMeansTest, KEqualsDistinctGivesZeroInertia) {
  Rng rng(8);
  const auto pts = testing::random_vectors(rng, 7, 2);
  EXPECT_NEAR(kmeans(pts, 7, 1).inertia, 0.0, 1e-20);
}

TEST(KMeansTest, RecoversSeparatedGaussians) {
  SynthSpec spec;
  spec.K_true = 3;
  spec.M = 1;
  spec.dim = 4;
  spec.per_class_count = 20;
  spec.cluster_std = 0.5;
  spec.center_separation = 10.0;
  const auto d = generate_synthetic(spec);
  std::vector<Vector> xs;
  std::vector<std::string> truth;
  for (const auto& r : d.test) {
    xs.push_back(r.x);
    truth.push_back(*r.label);
  }
  ASSERT_EQ(xs.size(), 60u);
  const auto c = kmeans(xs, 3, 5);
  EXPECT_EQ(clustering_accuracy(truth, c.assignment).accuracy, 1.0);
}

TEST(KMeansTest, InertiaTraceNonIncreasingAndDeterministic) {
  Rng rng(21);
  const auto pts = testing::random_vectors(rng, 120, 3);
  const auto a = kmeans(pts, 5, 4, {.max_iter = 300, .tol = 0.0, .restarts = 3});
  const auto b = kmeans(pts, 5, 4, {.max_iter = 300, .tol = 0.0, .restarts = 3});
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.inertia, b.inertia);
  for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) {
    EXPECT_LE(a.inertia_trace[i], a.inertia_trace[i - 1] + 1e-9);
  }
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NE(std::count(a.assignment.begin(), a.assignment.end(), k), 0);
  }
}

TEST(KMeansTest, Errors) {
  const std::vector<Vector> pts{Vector{1.0}, Vector{1.0}, Vector{2.0}};
  EXPECT_THROW(kmeans(pts, 3, 1), InfeasibleKError);
  EXPECT_THROW(kmeans(pts, 0, 1), InfeasibleKError);
  EXPECT_THROW(kmeans(std::vector<Vector>{}, 1, 1), EmptyInputError);
  EXPECT_EQ(count_distinct(pts), 2u);
}

TEST(AssignToNearestTest, TieGoesToLowestIndex) {
  const std::vector<Vector> p{Vector{0.0, 0.0}};
  const std::vector<Vector> c{Vector{1.0, 0.0}, Vector{0.0, 1.0}};
  EXPECT_EQ(assign_to_nearest(p, c), std::vector<std::size_t>{0});
}

TEST(AssignToNearestTest, ExactCenterAndBruteForce) {
  Rng rng(12);
  const auto centers = testing::random_vectors(rng, 5, 3);
  EXPECT_EQ(assign_to_nearest(std::vector<Vector>{centers[3]}, centers)[0], 3u);
  const auto pts = testing::random_vectors(rng, 50, 3);
  const auto got = assign_to_nearest(pts, centers);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < centers.size(); ++k) {
      if (squared_distance(pts[i], centers[k]) < squared_distance(pts[i], centers[best])) best = k;
    }
    EXPECT_EQ(got[i], best);
  }
  EXPECT_THROW(assign_to_nearest(pts, std::vector<Vector>{}), EmptyInputError);
}

}  // namespace
}  // namespace protodisc
