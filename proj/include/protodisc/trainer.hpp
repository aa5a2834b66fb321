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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protodisc/alignment.hpp"
#include "protodisc/config.hpp"
#include "protodisc/dataset.hpp"
#include "protodisc/head.hpp"
#include "protodisc/losses.hpp"

namespace protodisc {

// One evaluation of the training objective.
//   total       = spl_novel + known_total
//   known_total = spl_known + ce + gamma * reg
// Terms disabled by ablation flags are 0. Under no_decouple the single
// soft-assignment term over all unlabeled data is reported in spl_novel.
struct LossBreakdown {
  double spl_novel = 0.0;
  double spl_known = 0.0;
  double ce = 0.0;
  double reg = 0.0;
  double known_total = 0.0;
  double total = 0.0;
  bool novel_empty = false;  // K > M but no instance fell in an unmatched cluster

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct TrainState {
  ProjectionHead head;
  std::optional<LinearClassifier> classifier;
  PrototypeSet P_l;  // EMA-updated every epoch
  PrototypeSet P_u;  // fixed unless re-clustering is enabled
  MatchingResult matching;
  DecoupledData decoupled;
  std::vector<std::size_t> unlabeled_clusters;
  int epoch = 0;
  std::vector<LossBreakdown> loss_trace;
  std::vector<std::string> warnings;
};

// Raw (pre-head) inputs the objective is evaluated on. `labeled_targets[i]`
// indexes the labeled prototype set.
struct TrainingBatch {
  std::vector<Vector> labeled_x;
  std::vector<std::size_t> labeled_targets;
  std::vector<Vector> unlabeled_x;

  static TrainingBatch from_view(const TrainingView& view);
};

struct LossAndGradient {
  LossBreakdown breakdown;
  HeadGradient head;
  std::vector<double> classifier_V;  // empty unless a linear classifier is used
  std::vector<double> classifier_c;
};

// Evaluates the composed objective for the current state and backpropagates
// it to the head (and the optional linear classifier).
LossAndGradient total_loss(const TrainState& state, const TrainingBatch& batch,
                           const Config& config);

// old * alpha + fresh * (1 - alpha), component-wise. Throws ShapeError on a
// shape mismatch, ConfigError when alpha is outside [0, 1].
PrototypeSet ema_update(const PrototypeSet& old, const PrototypeSet& fresh, double alpha);

// K used for training: the fixed value, the label space's K, or an estimate
// from the raw unlabeled vectors.
std::size_t resolve_k(const TrainingView& view, const Config& config);

// Clusters the embedded unlabeled data, builds both prototype sets, matches
// and decouples. Leaves epoch = 0 and an empty loss trace.
TrainState initialize(const TrainingView& view, const Config& config);

// One full-batch gradient step followed by the labeled-prototype refresh.
void train_epoch(TrainState& state, const TrainingBatch& batch, const Config& config,
                 std::vector<double>& velocity);

TrainState train(const TrainingView& view, const Config& config);
TrainState train(const Dataset& dataset, const Config& config);

void write_loss_trace_tsv(std::ostream& out, std::span<const LossBreakdown> trace);

void write_checkpoint(std::ostream& out, const TrainState& state);
void write_checkpoint(const std::filesystem::path& path, const TrainState& state);
// Restores head, classifier, prototypes, matching and epoch. Throws
// SchemaError on malformed input, IoError when the file cannot be opened.
TrainState read_checkpoint(std::istream& in);
TrainState read_checkpoint(const std::filesystem::path& path);

}  // namespace protodisc
