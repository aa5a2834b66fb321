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
#include <vector>

#include "protodisc/config.hpp"
#include "protodisc/vector.hpp"

namespace protodisc {

class Rng;

// Trainable map z = act(x W + b) with W stored d_in x d_out, row-major.
struct ProjectionHead {
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::vector<double> W;
  std::vector<double> b;
  Activation activation = Activation::identity;

  // W = truncated identity, b = 0.
  static ProjectionHead identity(std::size_t d_in, std::size_t d_out,
                                 Activation act = Activation::identity);
  // W ~ N(0, scale^2), b = 0.
  static ProjectionHead random(std::size_t d_in, std::size_t d_out, Activation act, Rng& rng,
                               double scale);

  double& w(std::size_t i, std::size_t j) { return W[i * d_out + j]; }
  double w(std::size_t i, std::size_t j) const { return W[i * d_out + j]; }

  std::size_t parameter_count() const { return W.size() + b.size(); }

  // Throws DimensionError when x.dim() != d_in.
  Vector forward(const Vector& x) const;
  std::vector<Vector> forward(std::span<const Vector> xs) const;

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

struct HeadGradient {
  std::vector<double> W;
  std::vector<double> b;
};

// Chain rule from per-output gradients dL/dz_i to dL/dW, dL/db, summed over
// instances in input order.
HeadGradient backprop(const ProjectionHead& head, std::span<const Vector> inputs,
                      std::span<const Vector> output_grads);

}  // namespace protodisc
