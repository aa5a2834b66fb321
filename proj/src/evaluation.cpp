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

#include "protodisc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "protodisc/alignment.hpp"
#include "protodisc/errors.hpp"
#include "protodisc/rng.hpp"
#include "protodisc/text.hpp"

namespace protodisc {

AccuracyResult clustering_accuracy(std::span<const std::string> truth,
                                   std::span<const std::size_t> predicted) {
  if (truth.size() != predicted.size()) {
    throw ShapeError("clustering_accuracy: " + std::to_string(truth.size()) + " labels vs " +
                     std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw EmptyInputError("clustering_accuracy on zero instances");

  const std::set<std::string> label_set(truth.begin(), truth.end());
  const std::set<std::size_t> cluster_set(predicted.begin(), predicted.end());
  const std::vector<std::string> labels(label_set.begin(), label_set.end());
  const std::vector<std::size_t> clusters(cluster_set.begin(), cluster_set.end());
  auto label_pos = [&](const std::string& l) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), l) -
                                    labels.begin());
  };
  auto cluster_pos = [&](std::size_t c) {
    return static_cast<std::size_t>(std::lower_bound(clusters.begin(), clusters.end(), c) -
                                    clusters.begin());
  };

  // counts(cluster, label)
  Matrix counts(clusters.size(), labels.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    counts(cluster_pos(predicted[i]), label_pos(truth[i])) += 1.0;
  }

  AccuracyResult out;
  out.total = truth.size();
  const bool clusters_as_rows = clusters.size() <= labels.size();
  const std::size_t rows = clusters_as_rows ? clusters.size() : labels.size();
  const std::size_t cols = clusters_as_rows ? labels.size() : clusters.size();
  Matrix cost(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      cost(r, c) = clusters_as_rows ? -counts(r, c) : -counts(c, r);
    }
  }
  const auto a = solve_assignment(cost);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t ci = clusters_as_rows ? r : a.row_to_col[r];
    const std::size_t li = clusters_as_rows ? a.row_to_col[r] : r;
    out.mapping[clusters[ci]] = labels[li];
    out.correct += static_cast<std::size_t>(counts(ci, li));
  }
  out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.total);
  return out;
}

namespace {

std::size_t count_correct(std::span<const std::string> truth,
                          std::span<const std::size_t> predicted,
                          const std::map<std::size_t, std::string>& mapping) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto it = mapping.find(predicted[i]);
    if (it != mapping.end() && it->second == truth[i]) ++correct;
  }
  return correct;
}

double ratio_or_one(std::size_t correct, std::size_t total) {
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

EvalReport evaluate(const TrainState& state, std::span<const TestRow> test,
                    const LabelSpace& label_space, const EvalOptions& options) {
  if (test.empty()) throw EvalDataError("test split is empty");
  // Rows are processed in id order so the result does not depend on file order.
  std::vector<const TestRow*> rows;
  for (const auto& r : test) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(),
            [](const TestRow* a, const TestRow* b) { return a->id < b->id; });

  std::vector<Vector> xs;
  std::vector<std::string> truth;
  for (const auto* row : rows) {
    const auto& r = *row;
    if (!r.label || r.label->empty() || *r.label == "?") {
      throw EvalDataError("test row '" + r.id + "' has no ground-truth label");
    }
    xs.push_back(r.x);
    truth.push_back(*r.label);
  }

  EvalReport rep;
  rep.warnings = state.warnings;
  rep.loss_trace = state.loss_trace;
  rep.estimated_K = options.estimated_k;

  const auto z = state.head.forward(xs);
  std::size_t K = std::max<std::size_t>(state.P_u.size(), 1);
  const std::size_t distinct = count_distinct(z);
  if (K > distinct) {
    rep.warnings.push_back("test split has only " + std::to_string(distinct) +
                           " distinct embeddings; clustering with K=" + std::to_string(distinct));
    K = distinct;
  }
  rep.K = K;
  const auto clustering =
      kmeans(z, K, Rng::stream(options.seed, "eval/cluster").next_u64(), options.kmeans);
  const auto& pred = clustering.assignment;

  const auto global = clustering_accuracy(truth, pred);
  rep.n_all = truth.size();
  rep.correct_all = global.correct;
  rep.acc_all = global.accuracy;

  std::vector<std::string> truth_known, truth_novel;
  std::vector<std::size_t> pred_known, pred_novel;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (label_space.is_known(truth[i])) {
      truth_known.push_back(truth[i]);
      pred_known.push_back(pred[i]);
    } else {
      truth_novel.push_back(truth[i]);
      pred_novel.push_back(pred[i]);
    }
  }
  rep.n_known = truth_known.size();
  rep.n_novel = truth_novel.size();
  if (options.per_subset_mapping) {
    rep.correct_known =
        truth_known.empty() ? 0 : clustering_accuracy(truth_known, pred_known).correct;
    rep.correct_novel =
        truth_novel.empty() ? 0 : clustering_accuracy(truth_novel, pred_novel).correct;
  } else {
    rep.correct_known = count_correct(truth_known, pred_known, global.mapping);
    rep.correct_novel = count_correct(truth_novel, pred_novel, global.mapping);
  }
  rep.acc_known = ratio_or_one(rep.correct_known, rep.n_known);
  rep.acc_novel = ratio_or_one(rep.correct_novel, rep.n_novel);

  // Confusion matrix: truth rows, clusters ordered by mapped label.
  const std::set<std::string> label_set(truth.begin(), truth.end());
  rep.confusion_rows.assign(label_set.begin(), label_set.end());
  std::vector<std::size_t> col_order;
  for (const auto& l : rep.confusion_rows) {
    for (const auto& [c, mapped] : global.mapping) {
      if (mapped == l) col_order.push_back(c);
    }
  }
  for (std::size_t c = 0; c < K; ++c) {
    if (!global.mapping.contains(c)) col_order.push_back(c);
  }
  std::vector<std::size_t> col_of(K);
  for (std::size_t j = 0; j < col_order.size(); ++j) {
    col_of[col_order[j]] = j;
    const auto it = global.mapping.find(col_order[j]);
    rep.confusion_cols.push_back("c" + std::to_string(col_order[j]) +
                                 (it != global.mapping.end() ? "=" + it->second : ""));
  }
  rep.confusion = Matrix(rep.confusion_rows.size(), K);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto row = static_cast<std::size_t>(
        std::lower_bound(rep.confusion_rows.begin(), rep.confusion_rows.end(), truth[i]) -
        rep.confusion_rows.begin());
    rep.confusion(row, col_of[pred[i]]) += 1.0;
  }

  if (state.P_l.size() > 0 && state.matching.permutation.size() == state.P_l.size()) {
    rep.prototype_distances =
        prototype_distance_matrix(state.P_l, aligned_unlabeled(state.P_u, state.matching));
    rep.prototype_keys = state.P_l.category_keys;
    rep.abnormal_matches = abnormal_matches(state.matching);
  }
  return rep;
}

namespace {

struct Group {
  std::vector<std::size_t> members;
};

Vector group_mean(std::span<const Vector> points, const Group& g) {
  std::vector<Vector> xs;
  xs.reserve(g.members.size());
  for (auto i : g.members) xs.push_back(points[i]);
  return mean(xs);
}

// Separation of two groups along the line joining their means, in units of
// the pooled within-group spread of the projections.
double fisher_ratio(std::span<const Vector> points, const Group& a, const Group& b,
                    const Vector& ma, const Vector& mb) {
  const Vector axis = ma - mb;
  const double len = norm(axis);
  if (len == 0.0) return 0.0;
  auto stats = [&](const Group& g) {
    double s = 0.0, s2 = 0.0;
    for (auto i : g.members) {
      const double p = dot(points[i], axis) / len;
      s += p;
      s2 += p * p;
    }
    const double n = static_cast<double>(g.members.size());
    const double m = s / n;
    return std::pair{m, std::max(0.0, s2 / n - m * m)};
  };
  const auto [pa, va] = stats(a);
  const auto [pb, vb] = stats(b);
  const double spread = std::sqrt(va + vb);
  if (spread == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(pa - pb) / spread;
}

}  // namespace

std::size_t estimate_k(std::span<const Vector> points, std::size_t K_max, double threshold_factor,
                       std::uint64_t seed, const EstimateOptions& options) {
  if (K_max < 2) throw ConfigError("K_max must be at least 2");
  if (!(threshold_factor > 0.0 && threshold_factor < 1.0)) {
    throw ConfigError("threshold_factor must lie in (0, 1)");
  }
  if (points.size() < K_max) {
    throw InfeasibleKError("K_max=" + std::to_string(K_max) + " exceeds " +
                           std::to_string(points.size()) + " points");
  }
  const auto clustering = kmeans(points, K_max, seed, options.kmeans);

  std::vector<Group> groups(K_max);
  for (std::size_t i = 0; i < points.size(); ++i) {
    groups[clustering.assignment[i]].members.push_back(i);
  }
  std::erase_if(groups, [](const Group& g) { return g.members.empty(); });

  if (options.merge_factor > 0.0) {
    std::vector<Vector> means;
    for (const auto& g : groups) means.push_back(group_mean(points, g));
    while (groups.size() > 1) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t ba = 0, bb = 0;
      for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
          const double r = fisher_ratio(points, groups[a], groups[b], means[a], means[b]);
          if (r < best) {
            best = r;
            ba = a;
            bb = b;
          }
        }
      }
      if (!(best < options.merge_factor)) break;
      auto& into = groups[ba].members;
      into.insert(into.end(), groups[bb].members.begin(), groups[bb].members.end());
      std::sort(into.begin(), into.end());
      means[ba] = group_mean(points, groups[ba]);
      groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bb));
      means.erase(means.begin() + static_cast<std::ptrdiff_t>(bb));
    }
  }

  const double min_size =
      threshold_factor * static_cast<double>(points.size()) / static_cast<double>(K_max);
  const auto survivors = std::count_if(groups.begin(), groups.end(), [&](const Group& g) {
    return static_cast<double>(g.members.size()) >= min_size;
  });
  return std::max<std::size_t>(1, static_cast<std::size_t>(survivors));
}

namespace {

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

}  // namespace

void write_report_text(std::ostream& out, const EvalReport& r) {
  auto line = [&](const char* name, double acc, std::size_t correct, std::size_t n) {
    out << "  " << name << percent(acc) << "  (" << correct << "/" << n << ")\n";
  };
  out << "Evaluation report\n";
  out << "  clusters K:       " << r.K << '\n';
  if (r.estimated_K) out << "  estimated K:      " << *r.estimated_K << '\n';
  line("accuracy all:     ", r.acc_all, r.correct_all, r.n_all);
  line("accuracy known:   ", r.acc_known, r.correct_known, r.n_known);
  line("accuracy novel:   ", r.acc_novel, r.correct_novel, r.n_novel);
  if (!r.loss_trace.empty()) {
    out << "  loss first/last:  " << format_double(r.loss_trace.front().total) << " / "
        << format_double(r.loss_trace.back().total) << " over " << r.loss_trace.size()
        << " epochs\n";
  }
  if (!r.abnormal_matches.empty()) {
    out << "\nAbnormal prototype matches (> 3x median distance):\n";
    for (auto i : r.abnormal_matches) {
      out << "  " << (i < r.prototype_keys.size() ? r.prototype_keys[i] : std::to_string(i))
          << '\n';
    }
  }
  if (!r.warnings.empty()) {
    out << "\nWarnings:\n";
    for (const auto& w : r.warnings) out << "  " << w << '\n';
  }
  out << "\nReference figures from large-scale text benchmarks with a fine-tuned encoder\n"
         "(not reproducible with this engine):\n"
         "  StackOverflow  all 84.23%  known 85.29%  novel 81.07%\n"
         "  CLINC K estimate 137 for 150 categories (error 8.7%)\n";
}

void write_metrics_tsv(std::ostream& out, const EvalReport& r) {
  out << "metric\tvalue\n";
  out << "acc_all\t" << format_double(r.acc_all) << '\n';
  out << "acc_known\t" << format_double(r.acc_known) << '\n';
  out << "acc_novel\t" << format_double(r.acc_novel) << '\n';
  out << "n_all\t" << r.n_all << '\n';
  out << "n_known\t" << r.n_known << '\n';
  out << "n_novel\t" << r.n_novel << '\n';
  out << "correct_all\t" << r.correct_all << '\n';
  out << "correct_known\t" << r.correct_known << '\n';
  out << "correct_novel\t" << r.correct_novel << '\n';
  out << "K\t" << r.K << '\n';
  if (r.estimated_K) out << "estimated_K\t" << *r.estimated_K << '\n';
  if (!r.loss_trace.empty()) {
    out << "loss_initial\t" << format_double(r.loss_trace.front().total) << '\n';
    out << "loss_final\t" << format_double(r.loss_trace.back().total) << '\n';
  }
}

void write_confusion_tsv(std::ostream& out, const EvalReport& r) {
  write_matrix_tsv(out, r.confusion, r.confusion_rows, r.confusion_cols);
}

void write_prototype_distances_tsv(std::ostream& out, const EvalReport& r) {
  write_matrix_tsv(out, r.prototype_distances, r.prototype_keys, r.prototype_keys);
}

}  // namespace protodisc
