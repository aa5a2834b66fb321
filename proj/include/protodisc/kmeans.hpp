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
#include <span>
#include <vector>

#include "protodisc/vector.hpp"

namespace protodisc {

struct Clustering {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignment;  // per point, < centers.size()
  double inertia = 0.0;                 // sum of squared point-center distances
  int iterations = 0;
  // Inertia after each Lloyd update step of the returned run.
  std::vector<double> inertia_trace;

  std::size_t K() const { return centers.size(); }
};

struct KMeansOptions {
  int max_iter = 300;
  double tol = 1e-6;
  // Independent seeded initialisations; the lowest final inertia wins
  // (earliest restart on ties).
  int restarts = 1;
};

// Lloyd's algorithm from greedy k-means++ seeding. Stops when no center
// moves by more than `tol` in any coordinate, or after `max_iter` updates.
// An empty cluster takes over the point farthest from its own center, so the
// result always has K non-empty clusters.
//
// Throws EmptyInputError for no points, InfeasibleKError when K is zero or
// exceeds the number of distinct points.
Clustering kmeans(std::span<const Vector> points, std::size_t K, std::uint64_t seed,
                  const KMeansOptions& options = {});

// Index of the nearest center per point; ties go to the lowest index.
std::vector<std::size_t> assign_to_nearest(std::span<const Vector> points,
                                           std::span<const Vector> centers);

std::size_t count_distinct(std::span<const Vector> points);

}  // namespace protodisc
