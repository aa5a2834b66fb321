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

#include "protodisc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "protodisc/errors.hpp"
#include "protodisc/rng.hpp"

namespace protodisc {

std::vector<std::size_t> assign_to_nearest(std::span<const Vector> points,
                                           std::span<const Vector> centers) {
  if (centers.empty()) throw EmptyInputError("assign_to_nearest: no centers");
  std::vector<std::size_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const double d = squared_distance(points[i], centers[c]);
      if (d < best) {
        best = d;
        out[i] = c;
      }
    }
  }
  return out;
}

std::size_t count_distinct(std::span<const Vector> points) {
  std::vector<const std::vector<double>*> refs;
  refs.reserve(points.size());
  for (const auto& p : points) refs.push_back(&p.data());
  std::sort(refs.begin(), refs.end(), [](auto* a, auto* b) { return *a < *b; });
  return static_cast<std::size_t>(
      std::unique(refs.begin(), refs.end(), [](auto* a, auto* b) { return *a == *b; }) -
      refs.begin());
}

namespace {

// Greedy k-means++: each new center is the best of several D^2-weighted
// candidates, judged by the potential it leaves behind.
std::vector<Vector> seed_centers(std::span<const Vector> points, std::size_t K, Rng& rng) {
  const std::size_t n = points.size();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(K)));

  std::vector<Vector> centers;
  centers.push_back(points[rng.index(n)]);
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(points[i], centers[0]);

  std::vector<double> candidate_closest(n), best_closest(n);
  while (centers.size() < K) {
    double potential = 0.0;
    for (double d : closest) potential += d;

    std::size_t best_index = n;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const double target = rng.uniform() * potential;
      double acc = 0.0;
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += closest[i];
        if (acc > target && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // Guard against landing on an already-covered duplicate at the tail.
      while (closest[pick] == 0.0 && pick > 0) --pick;

      double cand_potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_closest[i] = std::min(closest[i], squared_distance(points[i], points[pick]));
        cand_potential += candidate_closest[i];
      }
      if (cand_potential < best_potential) {
        best_potential = cand_potential;
        best_index = pick;
        best_closest.swap(candidate_closest);
      }
    }
    centers.push_back(points[best_index]);
    closest.swap(best_closest);
  }
  return centers;
}

struct LloydRun {
  std::vector<Vector> centers;
  std::vector<std::size_t> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

double inertia_of(std::span<const Vector> points, std::span<const Vector> centers,
                  const std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += squared_distance(points[i], centers[assignment[i]]);
  }
  return total;
}

// Moves the point farthest from its center (in a cluster of size > 1) into
// each empty cluster.
void repair_empty(std::span<const Vector> points, const std::vector<Vector>& centers,
                  std::vector<std::size_t>& assignment, std::vector<std::size_t>& sizes) {
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] != 0) continue;
    std::size_t worst = points.size();
    double worst_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sizes[assignment[i]] <= 1) continue;
      const double d = squared_distance(points[i], centers[assignment[i]]);
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    if (worst == points.size()) throw EmptyClusterError("cannot repair empty cluster");
    --sizes[assignment[worst]];
    assignment[worst] = c;
    sizes[c] = 1;
  }
}

std::vector<Vector> cluster_means(std::span<const Vector> points,
                                  const std::vector<std::size_t>& assignment, std::size_t K,
                                  std::size_t dim) {
  std::vector<std::vector<double>> sums(K, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[assignment[i]];
    for (std::size_t j = 0; j < dim; ++j) s[j] += points[i][j];
    ++counts[assignment[i]];
  }
  std::vector<Vector> out;
  out.reserve(K);
  for (std::size_t c = 0; c < K; ++c) {
    for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
    out.emplace_back(std::move(sums[c]));
  }
  return out;
}

LloydRun lloyd(std::span<const Vector> points, std::vector<Vector> centers,
               const KMeansOptions& options) {
  const std::size_t K = centers.size();
  const std::size_t dim = points.front().dim();
  LloydRun run;
  for (int it = 0; it < options.max_iter; ++it) {
    auto assignment = assign_to_nearest(points, centers);
    std::vector<std::size_t> sizes(K, 0);
    for (auto a : assignment) ++sizes[a];
    repair_empty(points, centers, assignment, sizes);

    auto updated = cluster_means(points, assignment, K, dim);
    double shift = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      for (std::size_t j = 0; j < dim; ++j) {
        shift = std::max(shift, std::abs(updated[c][j] - centers[c][j]));
      }
    }
    centers = std::move(updated);
    run.assignment = std::move(assignment);
    run.trace.push_back(inertia_of(points, centers, run.assignment));
    run.iterations = it + 1;
    if (shift < options.tol) break;
  }
  run.centers = std::move(centers);
  run.inertia = run.trace.empty() ? 0.0 : run.trace.back();
  return run;
}

}  // namespace

Clustering kmeans(std::span<const Vector> points, std::size_t K, std::uint64_t seed,
                  const KMeansOptions& options) {
  if (points.empty()) throw EmptyInputError("kmeans: no points");
  for (const auto& p : points) require_same_dim(points.front(), p);
  if (options.max_iter < 1) throw ConfigError("kmeans: max_iter must be >= 1");
  if (K == 0) throw InfeasibleKError("kmeans: K must be >= 1");
  const std::size_t distinct = count_distinct(points);
  if (K > distinct) {
    throw InfeasibleKError("kmeans: K=" + std::to_string(K) + " exceeds " +
                           std::to_string(distinct) + " distinct points");
  }

  LloydRun best;
  bool have_best = false;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    auto rng = Rng::stream(seed, "kmeans/restart/" + std::to_string(r));
    auto run = lloyd(points, seed_centers(points, K, rng), options);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  Clustering out;
  out.centers = std::move(best.centers);
  out.assignment = std::move(best.assignment);
  out.inertia = best.inertia;
  out.iterations = best.iterations;
  out.inertia_trace = std::move(best.trace);
  return out;
}

}  // namespace protodisc
