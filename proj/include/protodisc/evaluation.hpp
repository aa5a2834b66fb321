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
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protodisc/dataset.hpp"
#include "protodisc/kmeans.hpp"
#include "protodisc/trainer.hpp"
#include "protodisc/vector.hpp"

namespace protodisc {

struct AccuracyResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  // Predicted cluster -> ground-truth label; clusters left unmatched (more
  // clusters than labels) are absent.
  std::map<std::size_t, std::string> mapping;
};

// Best one-to-one cluster -> label agreement, found with the assignment
// solver on the negated contingency table (padded square). Throws ShapeError
// when lengths differ, EmptyInputError on empty input.
AccuracyResult clustering_accuracy(std::span<const std::string> truth,
                                   std::span<const std::size_t> predicted);

struct EvalOptions {
  KMeansOptions kmeans{.restarts = 4};
  std::uint64_t seed = 1;
  // Re-solve the mapping separately on the known and novel subsets instead
  // of reusing the global one.
  bool per_subset_mapping = false;
  std::optional<std::size_t> estimated_k;
};

struct EvalReport {
  double acc_all = 0.0;
  double acc_known = 0.0;
  double acc_novel = 0.0;
  std::size_t n_all = 0;
  std::size_t n_known = 0;
  std::size_t n_novel = 0;
  std::size_t correct_all = 0;
  std::size_t correct_known = 0;
  std::size_t correct_novel = 0;
  std::optional<std::size_t> estimated_K;
  std::size_t K = 0;

  // Rows: ground-truth labels (sorted). Columns: predicted clusters, ordered
  // by the label each is mapped to, then unmapped clusters.
  Matrix confusion;
  std::vector<std::string> confusion_rows;
  std::vector<std::string> confusion_cols;

  Matrix prototype_distances;  // labeled vs aligned unlabeled prototypes
  std::vector<std::string> prototype_keys;
  std::vector<std::size_t> abnormal_matches;
  std::vector<LossBreakdown> loss_trace;
  std::vector<std::string> warnings;
};

// Embeds the test split with the trained head, clusters it into K groups
// (K = number of unlabeled prototypes) and scores it. Empty known or novel
// subsets score 1.0. Throws EvalDataError when a test row lacks ground truth.
EvalReport evaluate(const TrainState& state, std::span<const TestRow> test,
                    const LabelSpace& label_space, const EvalOptions& options = {});

struct EstimateOptions {
  KMeansOptions kmeans{.restarts = 4};
  // Clusters whose 1-D Fisher separation along the line joining their
  // centers is below this value are merged before the size filter runs.
  // 0 disables merging.
  double merge_factor = 4.0;
};

// Over-clusters with K_max, merges fragments of the same mode, drops clusters
// smaller than threshold_factor * n / K_max and returns the survivor count
// (at least 1). Throws ConfigError when K_max < 2 or threshold_factor is
// outside (0, 1), InfeasibleKError when n < K_max.
std::size_t estimate_k(std::span<const Vector> points, std::size_t K_max, double threshold_factor,
                       std::uint64_t seed, const EstimateOptions& options = {});

// Human-readable summary.
void write_report_text(std::ostream& out, const EvalReport& report);
// `metric\tvalue` lines; contains no timestamps so reruns compare equal.
void write_metrics_tsv(std::ostream& out, const EvalReport& report);
void write_confusion_tsv(std::ostream& out, const EvalReport& report);
void write_prototype_distances_tsv(std::ostream& out, const EvalReport& report);

}  // namespace protodisc
