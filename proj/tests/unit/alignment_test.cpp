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

#include "protodisc/alignment.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "protodisc/data_io.hpp"
#include "protodisc/errors.hpp"
#include "test_util.hpp"

namespace protodisc {
namespace {

PrototypeSet unlabeled_set(std::vector<Vector> v) {
  return {std::move(v), PrototypeKind::unlabeled, {}};
}

PrototypeSet labeled_set(std::vector<Vector> v) {
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < v.size(); ++i) keys.push_back("k" + std::to_string(i));
  return {std::move(v), PrototypeKind::labeled, std::move(keys)};
}

TEST(LabeledPrototypesTest, MeanPerCategory) {
  LabelSpace ls{{"a", "b"}, {}};
  const std::vector<Vector> z{Vector{0.0, 0.0}, Vector{2.0, 2.0}, Vector{5.0, -1.0}};
  const std::vector<std::string> labels{"a", "a", "b"};
  const auto p = labeled_prototypes(z, labels, ls);
  EXPECT_EQ(p.prototypes[0], Vector({1.0, 1.0}));
  EXPECT_EQ(p.prototypes[1], Vector({5.0, -1.0}));
  EXPECT_EQ(p.category_keys, ls.known_ids);
}

TEST(LabeledPrototypesTest, MatchesFixedOrderOracle) {
  Rng rng(6);
  LabelSpace ls{{"x", "y", "z"}, {}};
  std::vector<Vector> z;
  std::vector<std::string> labels;
  for (const auto& k : ls.known_ids) {
    for (int i = 0; i < 7; ++i) {
      z.push_back(testing::random_vector(rng, 4, 2.0));
      labels.push_back(k);
    }
  }
  const auto p = labeled_prototypes(z, labels, ls);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 4; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < 7; ++i) s += z[7 * c + i][j];
      EXPECT_NEAR(p.prototypes[c][j], s / 7.0, 1e-12);
    }
  }
}

TEST(LabeledPrototypesTest, Errors) {
  LabelSpace ls{{"a", "b"}, {}};
  const std::vector<Vector> z{Vector{1.0}};
  EXPECT_THROW(labeled_prototypes(z, std::vector<std::string>{"a"}, ls), MissingCategoryError);
  EXPECT_THROW(labeled_prototypes(z, std::vector<std::string>{"q"}, ls), LabelError);
}

TEST(UnlabeledPrototypesTest, MeansAndCenters) {
  const std::vector<Vector> pts{Vector{0.0, 0.0}, Vector{4.0, 0.0}};
  Clustering c;
  c.centers = pts;
  c.assignment = {0, 1};
  const auto p = unlabeled_prototypes(pts, c);
  EXPECT_EQ(p.prototypes[0], Vector({0.0, 0.0}));
  EXPECT_EQ(p.prototypes[1], Vector({4.0, 0.0}));

  Rng rng(10);
  const auto xs = testing::random_vectors(rng, 60, 3);
  const auto km = kmeans(xs, 4, 2, {.max_iter = 500, .tol = 0.0, .restarts = 1});
  const auto q = unlabeled_prototypes(xs, km);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(q.prototypes[k][j], km.centers[k][j], 1e-9);
  }
}

TEST(UnlabeledPrototypesTest, EmptyCluster) {
  const std::vector<Vector> pts{Vector{0.0}, Vector{1.0}};
  Clustering c;
  c.centers = {Vector{0.0}, Vector{1.0}, Vector{2.0}};
  c.assignment = {0, 1};
  EXPECT_THROW(unlabeled_prototypes(pts, c), EmptyClusterError);
}

TEST(SolveAssignmentTest, HandMatrices) {
  const auto a = solve_assignment(Matrix{{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_EQ(a.row_to_col, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(a.total_cost, 0.0);

  const auto b = solve_assignment(Matrix{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {3.0, 6.0, 9.0}});
  EXPECT_EQ(b.total_cost, 10.0);
  EXPECT_EQ(b.row_to_col, (std::vector<std::size_t>{2, 1, 0}));
}

TEST(SolveAssignmentTest, TiesResolveLexicographically) {
  const auto a = solve_assignment(Matrix(3, 4, 1.0));
  EXPECT_EQ(a.row_to_col, (std::vector<std::size_t>{0, 1, 2}));
  const auto b = solve_assignment(Matrix{{5.0, 1.0, 1.0}, {1.0, 1.0, 5.0}});
  EXPECT_EQ(b.row_to_col, (std::vector<std::size_t>{1, 0}));
}

TEST(SolveAssignmentTest, MatchesBruteForce) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.index(5);
    const std::size_t cols = rows + rng.index(3);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = static_cast<double>(rng.index(10));
    }
    const auto a = solve_assignment(m);
    EXPECT_EQ(a.total_cost, testing::brute_force_assignment(m));
    std::vector<bool> used(cols, false);
    for (auto c : a.row_to_col) {
      EXPECT_FALSE(used[c]);
      used[c] = true;
    }
  }
}

TEST(SolveAssignmentTest, TooManyRows) { EXPECT_THROW(solve_assignment(Matrix(3, 2)), ShapeError); }

TEST(HungarianMatchTest, NearestOfTwo) {
  const auto m =
      hungarian_match(labeled_set({Vector{0.0}}), unlabeled_set({Vector{3.0}, Vector{1.0}}));
  EXPECT_EQ(m.permutation, std::vector<std::size_t>{1});
  EXPECT_EQ(m.matched_unlabeled, std::vector<std::size_t>{1});
  EXPECT_EQ(m.unmatched_unlabeled, std::vector<std::size_t>{0});
  EXPECT_EQ(m.total_cost, 1.0);
}

TEST(HungarianMatchTest, Errors) {
  EXPECT_THROW(
      hungarian_match(labeled_set({Vector{0.0}, Vector{1.0}}), unlabeled_set({Vector{0.0}})),
      ShapeError);
  EXPECT_THROW(hungarian_match(labeled_set({Vector{0.0}}), unlabeled_set({Vector{0.0, 1.0}})),
               DimensionError);
}

TEST(DecoupleTest, UnmatchedClusterIsNovel) {
  const auto m = match_from_costs(Matrix{{0.0, 5.0, 9.0}, {9.0, 5.0, 0.0}});
  ASSERT_EQ(m.permutation, (std::vector<std::size_t>{0, 2}));
  Clustering c;
  c.centers = {Vector{0.0}, Vector{1.0}, Vector{2.0}};
  c.assignment = {0, 1, 2, 1, 0};
  const auto d = decouple(m, c, 5);
  EXPECT_EQ(d.known_part, (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_EQ(d.known_tags, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(d.novel_part, (std::vector<std::size_t>{1, 3}));
  EXPECT_THROW(decouple(m, c, 4), ShapeError);
}

TEST(DecoupleTest, FullMatchingLeavesNoNovel) {
  const auto m = match_from_costs(Matrix{{0.0, 1.0}, {1.0, 0.0}});
  Clustering c;
  c.centers = {Vector{0.0}, Vector{1.0}};
  c.assignment = {0, 1, 1};
  EXPECT_TRUE(decouple(m, c, 3).novel_part.empty());
}

TEST(DecoupleTest, KnownPartIsMostlyKnownOnSyntheticData) {
  SynthSpec spec;
  spec.K_true = 4;
  spec.M = 2;
  spec.seed = 12;
  const auto d = generate_synthetic(spec);
  const auto view = d.training_view();
  std::vector<Vector> xs;
  for (const auto& r : view.unlabeled) xs.push_back(r.x);
  const auto km = kmeans(xs, 4, 1, {.restarts = 4});
  const auto pu = unlabeled_prototypes(xs, km);
  const auto pl = labeled_prototypes(view.labeled, view.label_space);
  const auto dec = decouple(hungarian_match(pl, pu), km, xs.size());
  std::size_t known = 0;
  for (auto i : dec.known_part) known += d.label_space.is_known(*d.unlabeled_truth[i]);
  EXPECT_GE(static_cast<double>(known), 0.95 * static_cast<double>(dec.known_part.size()));
}

TEST(PrototypeDistanceMatrixTest, PairwiseDistances) {
  const auto a = labeled_set({Vector{0.0, 0.0}, Vector{1.0, 0.0}});
  const auto b = unlabeled_set({Vector{0.0, 3.0}, Vector{4.0, 4.0}});
  const auto m = prototype_distance_matrix(a, b);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(m(i, j), euclidean_distance(a.prototypes[i], b.prototypes[j]));
    }
  }
  const auto self = prototype_distance_matrix(a, a);
  EXPECT_EQ(self(0, 0), 0.0);
  EXPECT_EQ(self(1, 1), 0.0);
  EXPECT_THROW(prototype_distance_matrix(a, unlabeled_set({Vector{0.0, 0.0}})), ShapeError);
}

TEST(AlignedUnlabeledTest, FollowsLabeledOrder) {
  const auto pu = unlabeled_set({Vector{0.0}, Vector{10.0}, Vector{20.0}});
  const auto m = hungarian_match(labeled_set({Vector{19.0}, Vector{1.0}}), pu);
  const auto aligned = aligned_unlabeled(pu, m);
  EXPECT_EQ(aligned.prototypes, (std::vector<Vector>{Vector{20.0}, Vector{0.0}}));
}

TEST(AbnormalMatchesTest, FlagsFarMatches) {
  const auto m = match_from_costs(Matrix{{1.0, 50.0, 50.0, 50.0},
                                         {50.0, 1.2, 50.0, 50.0},
                                         {50.0, 50.0, 0.9, 50.0},
                                         {50.0, 50.0, 50.0, 40.0}});
  EXPECT_EQ(abnormal_matches(m), std::vector<std::size_t>{3});
}

TEST(WriteMatrixTsvTest, HeaderAndRows) {
  std::ostringstream out;
  const std::vector<std::string> rows{"a", "b"}, cols{"x", "y"};
  write_matrix_tsv(out, Matrix{{1.0, 0.5}, {0.0, 2.0}}, rows, cols);
  EXPECT_EQ(out.str(), "row\tx\ty\na\t1\t0.5\nb\t0\t2\n");
}

}  // namespace
}  // namespace protodisc
