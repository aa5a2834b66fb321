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

#include "protodisc/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "protodisc/errors.hpp"

namespace protodisc {

namespace {

void check_finite(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteError("vector component " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

Vector::Vector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DimensionError("vector must have dim >= 1");
  check_finite(values_);
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

void require_same_dim(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim() || a.empty()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
}

Vector operator+(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Vector(std::move(out));
}

Vector operator-(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Vector(std::move(out));
}

Vector operator*(double s, const Vector& a) {
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
  return Vector(std::move(out));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double squared_distance(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(const Vector& a, const Vector& b) {
  return std::sqrt(squared_distance(a, b));
}

double cosine_similarity(const Vector& a, const Vector& b) {
  require_same_dim(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw ZeroNormError("cosine similarity of a zero-norm vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw EmptyInputError("softmax of empty input");
  const double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

Vector mean(std::span<const Vector> points) {
  if (points.empty()) throw EmptyInputError("mean of empty set");
  std::vector<double> acc(points.front().dim(), 0.0);
  for (const Vector& p : points) {
    require_same_dim(points.front(), p);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  const auto n = static_cast<double>(points.size());
  for (double& v : acc) v /= n;
  return Vector(std::move(acc));
}

}  // namespace protodisc
