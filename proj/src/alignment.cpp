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

#include "protodisc/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "protodisc/errors.hpp"
#include "protodisc/text.hpp"

namespace protodisc {

PrototypeSet labeled_prototypes(std::span<const Vector> embeddings,
                                std::span<const std::string> labels,
                                const LabelSpace& label_space) {
  if (embeddings.size() != labels.size()) {
    throw ShapeError("labeled_prototypes: embeddings and labels differ in length");
  }
  std::vector<std::vector<Vector>> members(label_space.M());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto k = label_space.known_index(labels[i]);
    if (!k) throw LabelError("label '" + labels[i] + "' is not a known category");
    members[*k].push_back(embeddings[i]);
  }
  PrototypeSet out;
  out.kind = PrototypeKind::labeled;
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].empty()) {
      throw MissingCategoryError("known category '" + label_space.known_ids[k] +
                                 "' has no labeled instance");
    }
    out.prototypes.push_back(mean(members[k]));
    out.category_keys.push_back(label_space.known_ids[k]);
  }
  return out;
}

PrototypeSet labeled_prototypes(std::span<const LabeledRow> labeled,
                                const LabelSpace& label_space) {
  std::vector<Vector> xs;
  std::vector<std::string> ys;
  for (const auto& r : labeled) {
    xs.push_back(r.x);
    ys.push_back(r.label);
  }
  return labeled_prototypes(xs, ys, label_space);
}

PrototypeSet unlabeled_prototypes(std::span<const Vector> points, const Clustering& clustering) {
  if (clustering.assignment.size() != points.size()) {
    throw ShapeError("unlabeled_prototypes: clustering does not cover the points");
  }
  std::vector<std::vector<Vector>> members(clustering.K());
  for (std::size_t i = 0; i < points.size(); ++i) {
    members.at(clustering.assignment[i]).push_back(points[i]);
  }
  PrototypeSet out;
  out.kind = PrototypeKind::unlabeled;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) {
      throw EmptyClusterError("cluster " + std::to_string(c) + " is empty");
    }
    out.prototypes.push_back(mean(members[c]));
  }
  return out;
}

namespace {

// Square Hungarian method (shortest augmenting paths with potentials).
// Returns row -> column plus the dual potentials, which certify optimality:
// cost(i, j) - u[i] - v[j] >= 0 everywhere and == 0 on every optimal edge.
struct SquareSolution {
  std::vector<std::size_t> row_to_col;
  std::vector<double> u, v;
};

SquareSolution hungarian_square(const Matrix& a) {
  const std::size_t n = a.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  SquareSolution s;
  s.row_to_col.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) s.row_to_col[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

// Rewrites an optimal perfect matching into the lexicographically smallest
// one. Optimal assignments are exactly the perfect matchings on tight edges,
// so for each row in turn we take the lowest tight column that still admits
// a perfect matching of the remaining rows (checked by an alternating path).
void lexicographic_min(const Matrix& a, const SquareSolution& sol, std::size_t real_rows,
                       std::vector<std::size_t>& row_to_col) {
  const std::size_t n = a.rows();
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  }
  const double eps = 1e-10 * scale;
  auto tight = [&](std::size_t i, std::size_t j) {
    return std::abs(a(i, j) - sol.u[i] - sol.v[j]) <= eps;
  };

  std::vector<std::size_t> col_to_row(n);
  for (std::size_t i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;
  std::vector<bool> row_fixed(n, false), col_fixed(n, false);

  // Alternating path from row `start` to column `goal`, avoiding fixed rows
  // and columns plus `banned_row` / `banned_col`. On success the matching is
  // shifted along the path so `start` is matched and `goal` becomes taken.
  std::vector<std::size_t> parent_row(n), visited_stamp(n, 0);
  std::size_t stamp = 0;
  auto reroute = [&](std::size_t start, std::size_t goal, std::size_t banned_row,
                     std::size_t banned_col) -> bool {
    ++stamp;
    std::vector<std::size_t> queue{start};
    std::vector<std::size_t> via_col(n, n);  // column that led to each row
    std::vector<bool> row_seen(n, false);
    row_seen[start] = true;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t r = queue[q];
      for (std::size_t c = 0; c < n; ++c) {
        if (col_fixed[c] || c == banned_col || visited_stamp[c] == stamp) continue;
        if (!tight(r, c)) continue;
        visited_stamp[c] = stamp;
        parent_row[c] = r;
        if (c == goal) {
          // Walk back: each row on the path takes the column that reached it.
          std::size_t col = c;
          while (true) {
            const std::size_t row = parent_row[col];
            const std::size_t prev_col = via_col[row];
            row_to_col[row] = col;
            col_to_row[col] = row;
            if (row == start) break;
            col = prev_col;
          }
          return true;
        }
        const std::size_t next = col_to_row[c];
        if (row_fixed[next] || next == banned_row || row_seen[next]) continue;
        row_seen[next] = true;
        via_col[next] = c;
        queue.push_back(next);
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < real_rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (row_to_col[i] == j) break;
      const std::size_t holder = col_to_row[j];
      const std::size_t freed = row_to_col[i];
      if (reroute(holder, freed, i, j)) {
        row_to_col[i] = j;
        col_to_row[j] = i;
        break;
      }
    }
    row_fixed[i] = true;
    col_fixed[row_to_col[i]] = true;
  }
}

}  // namespace

Assignment solve_assignment(const Matrix& cost) {
  const std::size_t rows = cost.rows();
  const std::size_t cols = cost.cols();
  if (rows > cols) {
    throw ShapeError("assignment needs rows <= cols, got " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  Assignment out;
  if (rows == 0) return out;

  Matrix square(cols, cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (!std::isfinite(cost(i, j))) throw NonFiniteError("non-finite assignment cost");
      square(i, j) = cost(i, j);
    }
  }
  const auto sol = hungarian_square(square);
  auto row_to_col = sol.row_to_col;
  lexicographic_min(square, sol, rows, row_to_col);

  out.row_to_col.assign(row_to_col.begin(), row_to_col.begin() + static_cast<long>(rows));
  for (std::size_t i = 0; i < rows; ++i) out.total_cost += cost(i, out.row_to_col[i]);
  return out;
}

MatchingResult match_from_costs(const Matrix& cost) {
  const auto assignment = solve_assignment(cost);
  MatchingResult m;
  m.permutation = assignment.row_to_col;
  m.total_cost = assignment.total_cost;
  m.matched_unlabeled = assignment.row_to_col;
  std::vector<bool> taken(cost.cols(), false);
  for (auto c : assignment.row_to_col) taken[c] = true;
  for (std::size_t c = 0; c < cost.cols(); ++c) {
    if (!taken[c]) m.unmatched_unlabeled.push_back(c);
  }
  m.cost_matrix = cost;
  return m;
}

MatchingResult hungarian_match(const PrototypeSet& labeled, const PrototypeSet& unlabeled) {
  const std::size_t M = labeled.size();
  const std::size_t K = unlabeled.size();
  if (M == 0) throw ShapeError("hungarian_match: no labeled prototypes");
  if (M > K) {
    throw ShapeError("hungarian_match: M=" + std::to_string(M) + " exceeds K=" + std::to_string(K));
  }
  Matrix cost(M, K);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < K; ++j) {
      cost(i, j) = euclidean_distance(labeled.prototypes[i], unlabeled.prototypes[j]);
    }
  }
  return match_from_costs(cost);
}

DecoupledData decouple(const MatchingResult& matching, const Clustering& clustering,
                       std::size_t unlabeled_count) {
  if (clustering.assignment.size() != unlabeled_count) {
    throw ShapeError("decouple: clustering covers " + std::to_string(clustering.assignment.size()) +
                     " instances, expected " + std::to_string(unlabeled_count));
  }
  if (matching.cost_matrix.cols() != clustering.K()) {
    throw ShapeError("decouple: matching and clustering disagree on K");
  }
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cluster_to_known(clustering.K(), kNone);
  for (std::size_t i = 0; i < matching.permutation.size(); ++i) {
    cluster_to_known[matching.permutation[i]] = i;
  }
  DecoupledData out;
  for (std::size_t i = 0; i < unlabeled_count; ++i) {
    const std::size_t tag = cluster_to_known.at(clustering.assignment[i]);
    if (tag == kNone) {
      out.novel_part.push_back(i);
    } else {
      out.known_part.push_back(i);
      out.known_tags.push_back(tag);
    }
  }
  return out;
}

PrototypeSet aligned_unlabeled(const PrototypeSet& unlabeled, const MatchingResult& matching) {
  PrototypeSet out;
  out.kind = PrototypeKind::unlabeled;
  for (auto j : matching.matched_unlabeled) out.prototypes.push_back(unlabeled.prototypes.at(j));
  return out;
}

Matrix prototype_distance_matrix(const PrototypeSet& labeled, const PrototypeSet& aligned) {
  if (labeled.size() != aligned.size() || labeled.size() == 0) {
    throw ShapeError("prototype_distance_matrix: sets of size " + std::to_string(labeled.size()) +
                     " and " + std::to_string(aligned.size()));
  }
  if (labeled.dim() != aligned.dim()) throw ShapeError("prototype_distance_matrix: dim mismatch");
  const std::size_t M = labeled.size();
  Matrix out(M, M);
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < M; ++j) {
      out(i, j) = euclidean_distance(labeled.prototypes[i], aligned.prototypes[j]);
    }
  }
  return out;
}

std::vector<std::size_t> abnormal_matches(const MatchingResult& matching, double factor) {
  std::vector<double> d;
  for (std::size_t i = 0; i < matching.permutation.size(); ++i) {
    d.push_back(matching.cost_matrix(i, matching.permutation[i]));
  }
  std::vector<std::size_t> out;
  if (d.empty()) return out;
  auto sorted = d;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > factor * median) out.push_back(i);
  }
  return out;
}

void write_matrix_tsv(std::ostream& out, const Matrix& m, std::span<const std::string> row_names,
                      std::span<const std::string> col_names) {
  out << "row";
  for (std::size_t j = 0; j < m.cols(); ++j) {
    out << '\t' << (j < col_names.size() ? col_names[j] : std::to_string(j));
  }
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << (i < row_names.size() ? row_names[i] : std::to_string(i));
    for (std::size_t j = 0; j < m.cols(); ++j) out << '\t' << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace protodisc
