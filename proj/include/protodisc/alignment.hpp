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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "protodisc/dataset.hpp"
#include "protodisc/kmeans.hpp"
#include "protodisc/vector.hpp"

namespace protodisc {

enum class PrototypeKind { labeled, unlabeled };

// Ordered category prototypes. For labeled sets `category_keys[j]` is the
// known-category id of prototype j; unlabeled sets leave it empty.
struct PrototypeSet {
  std::vector<Vector> prototypes;
  PrototypeKind kind = PrototypeKind::unlabeled;
  std::vector<std::string> category_keys;

  std::size_t size() const { return prototypes.size(); }
  std::size_t dim() const { return prototypes.empty() ? 0 : prototypes.front().dim(); }

  friend bool operator==(const PrototypeSet&, const PrototypeSet&) = default;
};

// Mean embedding per known category, ordered by label_space.known_ids.
// `labels[i]` is the category of `embeddings[i]`. Throws MissingCategoryError
// when a known category has no instance, LabelError on a label outside the
// known set.
PrototypeSet labeled_prototypes(std::span<const Vector> embeddings,
                                std::span<const std::string> labels, const LabelSpace& label_space);
PrototypeSet labeled_prototypes(std::span<const LabeledRow> labeled, const LabelSpace& label_space);

// Mean of the points assigned to each cluster. Throws EmptyClusterError.
PrototypeSet unlabeled_prototypes(std::span<const Vector> points, const Clustering& clustering);

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double total_cost = 0.0;  // summed in row order
};

// Minimum-cost assignment of every row to a distinct column (rows <= cols).
// Rectangular inputs are padded with zero-cost dummy rows and solved with the
// O(n^3) Hungarian method. Among equal-cost optima the lexicographically
// smallest row_to_col is returned. Throws ShapeError when rows > cols.
Assignment solve_assignment(const Matrix& cost);

struct MatchingResult {
  // permutation[i] = unlabeled prototype matched to labeled prototype i.
  std::vector<std::size_t> permutation;
  double total_cost = 0.0;
  std::vector<std::size_t> matched_unlabeled;    // in labeled order
  std::vector<std::size_t> unmatched_unlabeled;  // ascending
  Matrix cost_matrix;                            // M x K Euclidean distances

  friend bool operator==(const MatchingResult&, const MatchingResult&) = default;
};

// Optimal injective matching of labeled to unlabeled prototypes under
// Euclidean cost. Throws ShapeError when M > K, DimensionError on dim
// mismatch.
MatchingResult hungarian_match(const PrototypeSet& labeled, const PrototypeSet& unlabeled);

// Same, from a precomputed M x K cost matrix.
MatchingResult match_from_costs(const Matrix& cost);

// Unlabeled instances split by whether their cluster was matched. Indices
// refer to positions in the unlabeled split.
struct DecoupledData {
  std::vector<std::size_t> known_part;
  // Labeled-prototype (known-category) index for each known_part entry.
  std::vector<std::size_t> known_tags;
  std::vector<std::size_t> novel_part;

  friend bool operator==(const DecoupledData&, const DecoupledData&) = default;
};

// Throws ShapeError when the clustering does not cover `unlabeled_count`
// instances or does not match the matching's K.
DecoupledData decouple(const MatchingResult& matching, const Clustering& clustering,
                       std::size_t unlabeled_count);

// Matched unlabeled prototypes in labeled order.
PrototypeSet aligned_unlabeled(const PrototypeSet& unlabeled, const MatchingResult& matching);

// Entry (i, j) = distance between labeled prototype i and aligned unlabeled
// prototype j. Throws ShapeError unless both sets have the same size.
Matrix prototype_distance_matrix(const PrototypeSet& labeled, const PrototypeSet& aligned);

// Labeled indices whose matched distance exceeds `factor` times the median
// matched distance.
std::vector<std::size_t> abnormal_matches(const MatchingResult& matching, double factor = 3.0);

// Tab-separated grid with a header row; `row_names` / `col_names` may be empty.
void write_matrix_tsv(std::ostream& out, const Matrix& m,
                      std::span<const std::string> row_names = {},
                      std::span<const std::string> col_names = {});

}  // namespace protodisc
