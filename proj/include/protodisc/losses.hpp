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
#include <span>
#include <string>
#include <vector>

#include "protodisc/alignment.hpp"
#include "protodisc/vector.hpp"

namespace protodisc {

// Scalar loss plus dL/dz for every embedding, in input order. Prototypes are
// constants: no gradient flows into them.
struct LossResult {
  double loss = 0.0;
  std::vector<Vector> grad;
};

enum class Weighting {
  semantic,  // softmax over cos(z, mu_k) / tau
  uniform,   // 1 / K' for every prototype
};

struct SoftAssignOptions {
  Weighting weighting = Weighting::semantic;
  // Treat the semantic weights as constants when differentiating.
  bool detach_weights = false;
};

// Per-instance assignment weights softmax_k(cos(z_i, mu_k) / tau).
// Throws ZeroNormError on a zero-norm embedding or prototype, ConfigError
// when tau <= 0.
std::vector<std::vector<double>> semantic_weights(std::span<const Vector> embeddings,
                                                  const PrototypeSet& prototypes, double tau);

// Semantic-aware prototypical loss:
//   (1/n) sum_i sum_k ||z_i - mu_k|| * w_ik
// with w from `semantic_weights` (or uniform). The gradient runs through both
// the distance factor and the weights unless detached. At z_i == mu_k the
// distance gradient is taken as zero.
LossResult spl_loss(std::span<const Vector> embeddings, const PrototypeSet& prototypes, double tau,
                    const SoftAssignOptions& options = {});

// Hard-assignment prototypical loss: mean negative log of the softmax over
// negative Euclidean distances, evaluated at the assigned prototype.
// Only Euclidean distances are involved, so zero-norm inputs are allowed.
LossResult pl_loss(std::span<const Vector> embeddings, std::span<const std::size_t> assignments,
                   const PrototypeSet& prototypes);

// Knowledge-transfer regularizer against labeled prototypes:
//   (1/r) sum_i sum_k (1 - cos(z_i, mu_k)) * w_ik
LossResult reg_loss(std::span<const Vector> embeddings, const PrototypeSet& labeled, double tau,
                    const SoftAssignOptions& options = {});

// Cross-entropy of the true category under softmax_j(cos(z, mu_j) / tau).
// `targets[i]` indexes the labeled prototype set.
LossResult ce_loss(std::span<const Vector> embeddings, std::span<const std::size_t> targets,
                   const PrototypeSet& labeled, double tau);

// Same, with string labels resolved through `labeled.category_keys`.
// Throws LabelError for a label without a prototype.
LossResult ce_loss(std::span<const Vector> embeddings, std::span<const std::string> labels,
                   const PrototypeSet& labeled, double tau);

// Optional linear classifier for the cross-entropy term: logits = V z + c,
// V stored classes x dim, row-major.
struct LinearClassifier {
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<double> V;
  std::vector<double> c;

  static LinearClassifier zeros(std::size_t classes, std::size_t dim);

  friend bool operator==(const LinearClassifier&, const LinearClassifier&) = default;
};

struct LinearCeResult {
  LossResult embedding;
  std::vector<double> grad_V;
  std::vector<double> grad_c;
};

LinearCeResult ce_loss_linear(std::span<const Vector> embeddings,
                              std::span<const std::size_t> targets,
                              const LinearClassifier& classifier);

}  // namespace protodisc
