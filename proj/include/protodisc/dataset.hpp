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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protodisc/vector.hpp"

namespace protodisc {

// Known categories (from the labeled split) and novel categories (seen only
// in ground truth of the unlabeled or test split).
struct LabelSpace {
  std::vector<std::string> known_ids;
  std::vector<std::string> novel_ids;

  std::size_t M() const { return known_ids.size(); }
  std::size_t K() const { return known_ids.size() + novel_ids.size(); }

  bool is_known(const std::string& label) const;
  std::optional<std::size_t> known_index(const std::string& label) const;

  // Throws SchemaError unless M >= 1 and the two id lists are disjoint.
  void validate() const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

struct LabeledRow {
  std::string id;
  Vector x;
  std::string label;

  friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

// Training-visible unlabeled instance. Ground truth lives in
// Dataset::unlabeled_truth and never travels with this row.
struct UnlabeledRow {
  std::string id;
  Vector x;

  friend bool operator==(const UnlabeledRow&, const UnlabeledRow&) = default;
};

struct TestRow {
  std::string id;
  Vector x;
  std::optional<std::string> label;

  friend bool operator==(const TestRow&, const TestRow&) = default;
};

// What the training path is allowed to see: no unlabeled or test ground
// truth. Non-owning; must not outlive the Dataset it came from.
struct TrainingView {
  std::span<const LabeledRow> labeled;
  std::span<const UnlabeledRow> unlabeled;
  LabelSpace label_space;
};

struct Dataset {
  std::vector<LabeledRow> labeled;
  std::vector<UnlabeledRow> unlabeled;
  // Parallel to `unlabeled`; evaluation-only sidecar.
  std::vector<std::optional<std::string>> unlabeled_truth;
  std::vector<TestRow> test;
  LabelSpace label_space;

  std::size_t dim() const;

  // Hard invariants: shared dim, labeled labels are known, ids disjoint
  // across splits, truth sidecar aligned. Throws SchemaError /
  // DuplicateIdError / MissingLabelError.
  void validate() const;

  // Soft invariants. Currently: known categories absent from the unlabeled
  // ground truth (when any truth is present).
  std::vector<std::string> warnings() const;

  TrainingView training_view() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace protodisc
