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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "protodisc/dataset.hpp"

namespace protodisc {

// One row of an embedding file. `label` is empty for the "?" sentinel.
struct EmbeddingRow {
  std::string id;
  std::optional<std::string> label;
  Vector x;
};

// Tab-separated embedding file:
//
//   dim=<d> count=<n>
//   <id>\t<label-or-?>\t<v1>\t...\t<vd>
//
// Ids must be unique within a file and every row must carry exactly `dim`
// finite components.
struct EmbeddingFile {
  std::size_t dim = 0;
  std::vector<EmbeddingRow> rows;

  static EmbeddingFile read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

// Builds a validated Dataset from the three split files. The unlabeled file's
// label column is ground truth (or "?") and is routed into the evaluation-only
// sidecar. Known ids are the sorted distinct labels of the labeled file; novel
// ids are the remaining labels seen in unlabeled/test ground truth.
Dataset load_dataset(const std::filesystem::path& labeled_file,
                     const std::filesystem::path& unlabeled_file,
                     const std::filesystem::path& test_file);

struct DatasetManifest {
  std::filesystem::path labeled;
  std::filesystem::path unlabeled;
  std::filesystem::path test;
  std::size_t dim = 0;
  std::size_t M = 0;
  std::optional<std::size_t> K;
  std::size_t labeled_count = 0;
  std::size_t unlabeled_count = 0;
  std::size_t test_count = 0;

  static DatasetManifest read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

inline constexpr const char* kManifestName = "manifest.txt";

// Loads through `<directory>/manifest.txt` and cross-checks the recorded
// counts, dim and M against the files.
Dataset load_dataset_dir(const std::filesystem::path& directory);

// Writes labeled.tsv, unlabeled.tsv, test.tsv and manifest.txt. Returns the
// manifest path. Throws IoError on any write failure.
std::filesystem::path save_dataset(const Dataset& d, const std::filesystem::path& directory);

struct SynthSpec {
  int K_true = 6;
  int M = 4;
  int dim = 16;
  int per_class_count = 50;
  int test_per_class = 0;  // 0: same as per_class_count
  double cluster_std = 0.5;
  double center_separation = 8.0;
  double labeled_ratio = 0.5;
  bool random_known = false;
  std::uint64_t seed = 1;

  double known_ratio() const { return static_cast<double>(M) / K_true; }

  // Throws ConfigError unless 1 <= M <= K_true, 0 < labeled_ratio < 1,
  // cluster_std > 0, center_separation > 0, dim >= 1, per_class_count >= 2.
  void validate() const;
};

// Isotropic Gaussian mixture with rejection-sampled centers. Deterministic in
// spec.seed. Throws SeparationError after 10,000 rejected center draws.
Dataset generate_synthetic(const SynthSpec& spec);

}  // namespace protodisc
