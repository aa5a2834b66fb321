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

#include "protodisc/head.hpp"

#include <algorithm>
#include <cmath>

#include "protodisc/errors.hpp"
#include "protodisc/rng.hpp"

namespace protodisc {

ProjectionHead ProjectionHead::identity(std::size_t d_in, std::size_t d_out, Activation act) {
  ProjectionHead h;
  h.d_in = d_in;
  h.d_out = d_out;
  h.activation = act;
  h.W.assign(d_in * d_out, 0.0);
  h.b.assign(d_out, 0.0);
  for (std::size_t i = 0; i < std::min(d_in, d_out); ++i) h.w(i, i) = 1.0;
  return h;
}

ProjectionHead ProjectionHead::random(std::size_t d_in, std::size_t d_out, Activation act, Rng& rng,
                                      double scale) {
  auto h = identity(d_in, d_out, act);
  for (double& v : h.W) v = scale * rng.normal();
  return h;
}

namespace {

std::vector<double> pre_activation(const ProjectionHead& h, const Vector& x) {
  if (x.dim() != h.d_in) {
    throw DimensionError("head expects dim " + std::to_string(h.d_in) + ", got " +
                         std::to_string(x.dim()));
  }
  std::vector<double> a = h.b;
  for (std::size_t i = 0; i < h.d_in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = &h.W[i * h.d_out];
    for (std::size_t j = 0; j < h.d_out; ++j) a[j] += xi * row[j];
  }
  return a;
}

}  // namespace

Vector ProjectionHead::forward(const Vector& x) const {
  auto a = pre_activation(*this, x);
  if (activation == Activation::tanh) {
    for (double& v : a) v = std::tanh(v);
  }
  return Vector(std::move(a));
}

std::vector<Vector> ProjectionHead::forward(std::span<const Vector> xs) const {
  std::vector<Vector> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(forward(x));
  return out;
}

HeadGradient backprop(const ProjectionHead& head, std::span<const Vector> inputs,
                      std::span<const Vector> output_grads) {
  if (inputs.size() != output_grads.size()) {
    throw ShapeError("backprop: inputs and gradients differ in length");
  }
  HeadGradient g;
  g.W.assign(head.W.size(), 0.0);
  g.b.assign(head.b.size(), 0.0);
  std::vector<double> delta(head.d_out);
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const Vector& x = inputs[n];
    const Vector& gz = output_grads[n];
    if (gz.dim() != head.d_out) throw DimensionError("backprop: gradient dim mismatch");
    if (head.activation == Activation::tanh) {
      const auto a = pre_activation(head, x);
      for (std::size_t j = 0; j < head.d_out; ++j) {
        const double t = std::tanh(a[j]);
        delta[j] = gz[j] * (1.0 - t * t);
      }
    } else {
      for (std::size_t j = 0; j < head.d_out; ++j) delta[j] = gz[j];
    }
    for (std::size_t i = 0; i < head.d_in; ++i) {
      const double xi = x[i];
      double* row = &g.W[i * head.d_out];
      for (std::size_t j = 0; j < head.d_out; ++j) row[j] += xi * delta[j];
    }
    for (std::size_t j = 0; j < head.d_out; ++j) g.b[j] += delta[j];
  }
  return g;
}

}  // namespace protodisc
