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

#include "protodisc/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "protodisc/errors.hpp"
#include "protodisc/evaluation.hpp"
#include "protodisc/kmeans.hpp"
#include "protodisc/rng.hpp"
#include "protodisc/text.hpp"

namespace protodisc {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  return Rng::stream(seed, name).next_u64();
}

KMeansOptions kmeans_options(const Config& c) {
  return {c.kmeans_max_iter, c.kmeans_tol, c.kmeans_restarts};
}

template <typename T>
std::vector<T> gather(const std::vector<T>& from, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(from[i]);
  return out;
}

PrototypeSet subset(const PrototypeSet& p, std::span<const std::size_t> idx) {
  PrototypeSet out;
  out.kind = p.kind;
  for (auto i : idx) {
    out.prototypes.push_back(p.prototypes.at(i));
    if (!p.category_keys.empty()) out.category_keys.push_back(p.category_keys.at(i));
  }
  return out;
}

PrototypeSet class_means(const std::vector<Vector>& z, std::span<const std::size_t> targets,
                         const std::vector<std::string>& keys) {
  std::vector<std::vector<Vector>> members(keys.size());
  for (std::size_t i = 0; i < z.size(); ++i) members.at(targets[i]).push_back(z[i]);
  PrototypeSet out;
  out.kind = PrototypeKind::labeled;
  out.category_keys = keys;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (members[k].empty()) {
      throw MissingCategoryError("known category '" + keys[k] + "' has no labeled instance");
    }
    out.prototypes.push_back(mean(members[k]));
  }
  return out;
}

// Mutable per-embedding gradient accumulator.
struct GradBuffer {
  std::vector<std::vector<double>> rows;

  GradBuffer(std::size_t n, std::size_t dim) : rows(n, std::vector<double>(dim, 0.0)) {}

  void add(std::span<const std::size_t> idx, const std::vector<Vector>& grads, double scale) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto& row = rows[idx[k]];
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += scale * grads[k][j];
    }
  }

  std::vector<Vector> finish() {
    std::vector<Vector> out;
    out.reserve(rows.size());
    for (auto& r : rows) out.emplace_back(std::move(r));
    return out;
  }
};

void cluster_and_align(TrainState& state, const TrainingBatch& batch, const Config& config,
                       std::size_t K, std::uint64_t seed) {
  const auto z_u = state.head.forward(batch.unlabeled_x);
  const auto clustering = kmeans(z_u, K, seed, kmeans_options(config));
  state.P_u = unlabeled_prototypes(z_u, clustering);
  state.unlabeled_clusters = clustering.assignment;
  state.matching = hungarian_match(state.P_l, state.P_u);
  state.decoupled = decouple(state.matching, clustering, batch.unlabeled_x.size());

  for (auto i : abnormal_matches(state.matching)) {
    state.warnings.push_back("labeled prototype '" + state.P_l.category_keys.at(i) +
                             "' matched at more than 3x the median matched distance");
  }
  if (state.decoupled.novel_part.empty() && K > state.P_l.size()) {
    state.warnings.push_back("no unlabeled instance fell in an unmatched cluster; novel loss is 0");
  }
}

}  // namespace

TrainingBatch TrainingBatch::from_view(const TrainingView& view) {
  TrainingBatch b;
  for (const auto& r : view.labeled) {
    const auto k = view.label_space.known_index(r.label);
    if (!k) throw LabelError("labeled row '" + r.id + "' has unknown label '" + r.label + "'");
    b.labeled_x.push_back(r.x);
    b.labeled_targets.push_back(*k);
  }
  for (const auto& r : view.unlabeled) b.unlabeled_x.push_back(r.x);
  return b;
}

LossAndGradient total_loss(const TrainState& state, const TrainingBatch& batch,
                           const Config& config) {
  const auto& ab = config.ablation;
  const double tau = config.tau;
  const auto z_l = state.head.forward(batch.labeled_x);
  const auto z_u = state.head.forward(batch.unlabeled_x);
  const std::size_t dim = state.head.d_out;
  GradBuffer g_l(z_l.size(), dim), g_u(z_u.size(), dim);

  const SoftAssignOptions spl_opts{
      ab.no_semantic_weights ? Weighting::uniform : Weighting::semantic, config.detach_weights};

  // One prototype-pulling term over a subset of unlabeled instances.
  auto prototype_term = [&](std::span<const std::size_t> idx, const PrototypeSet& protos,
                            std::span<const std::size_t> hard_targets) -> double {
    if (idx.empty()) return 0.0;
    const auto z = gather(z_u, idx);
    const auto r = ab.no_soft_assignment ? pl_loss(z, hard_targets, protos)
                                         : spl_loss(z, protos, tau, spl_opts);
    g_u.add(idx, r.grad, 1.0);
    return r.loss;
  };

  LossAndGradient out;
  LossBreakdown& b = out.breakdown;

  if (ab.no_decouple) {
    std::vector<std::size_t> all(z_u.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    b.spl_novel = prototype_term(all, state.P_u, state.unlabeled_clusters);
  } else {
    const auto& unmatched = state.matching.unmatched_unlabeled;
    const auto P_un = subset(state.P_u, unmatched);
    std::vector<std::size_t> novel_targets;
    for (auto i : state.decoupled.novel_part) {
      const auto c = state.unlabeled_clusters.at(i);
      novel_targets.push_back(static_cast<std::size_t>(
          std::find(unmatched.begin(), unmatched.end(), c) - unmatched.begin()));
    }
    b.novel_empty = state.decoupled.novel_part.empty() && !unmatched.empty();
    b.spl_novel = prototype_term(state.decoupled.novel_part, P_un, novel_targets);

    const auto P_uk = aligned_unlabeled(state.P_u, state.matching);
    b.spl_known = prototype_term(state.decoupled.known_part, P_uk, state.decoupled.known_tags);

    if (!state.decoupled.known_part.empty()) {
      const auto z_uk = gather(z_u, state.decoupled.known_part);
      const auto r = reg_loss(z_uk, state.P_l, tau, {Weighting::semantic, config.detach_weights});
      b.reg = r.loss;
      g_u.add(state.decoupled.known_part, r.grad, config.gamma);
    }
  }

  if (!ab.no_ce && !z_l.empty()) {
    std::vector<std::size_t> all(z_l.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (state.classifier) {
      auto r = ce_loss_linear(z_l, batch.labeled_targets, *state.classifier);
      b.ce = r.embedding.loss;
      g_l.add(all, r.embedding.grad, 1.0);
      out.classifier_V = std::move(r.grad_V);
      out.classifier_c = std::move(r.grad_c);
    } else {
      const auto r = ce_loss(z_l, batch.labeled_targets, state.P_l, tau);
      b.ce = r.loss;
      g_l.add(all, r.grad, 1.0);
    }
  } else if (state.classifier) {
    out.classifier_V.assign(state.classifier->V.size(), 0.0);
    out.classifier_c.assign(state.classifier->c.size(), 0.0);
  }

  b.known_total = b.spl_known + b.ce + config.gamma * b.reg;
  b.total = b.spl_novel + b.known_total;

  std::vector<Vector> inputs = batch.labeled_x;
  inputs.insert(inputs.end(), batch.unlabeled_x.begin(), batch.unlabeled_x.end());
  auto grads = g_l.finish();
  auto gu = g_u.finish();
  grads.insert(grads.end(), std::make_move_iterator(gu.begin()), std::make_move_iterator(gu.end()));
  out.head = backprop(state.head, inputs, grads);
  return out;
}

PrototypeSet ema_update(const PrototypeSet& old, const PrototypeSet& fresh, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("EMA alpha must lie in [0, 1]");
  if (old.size() != fresh.size() || old.dim() != fresh.dim()) {
    throw ShapeError("ema_update: prototype sets differ in shape");
  }
  PrototypeSet out = old;
  for (std::size_t k = 0; k < old.size(); ++k) {
    std::vector<double> v(old.dim());
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = alpha * old.prototypes[k][j] + (1.0 - alpha) * fresh.prototypes[k][j];
    }
    out.prototypes[k] = Vector(std::move(v));
  }
  return out;
}

std::size_t resolve_k(const TrainingView& view, const Config& config) {
  switch (config.k.mode) {
    case KSetting::Mode::fixed:
      return static_cast<std::size_t>(config.k.value);
    case KSetting::Mode::from_data:
      return view.label_space.K();
    case KSetting::Mode::estimate: {
      std::vector<Vector> xs;
      for (const auto& r : view.unlabeled) xs.push_back(r.x);
      const std::size_t M = view.label_space.M();
      std::size_t k_max = config.k_max > 0 ? static_cast<std::size_t>(config.k_max)
                                           : std::max<std::size_t>(8, 4 * M);
      k_max = std::min(k_max, xs.size());
      EstimateOptions opts{kmeans_options(config), config.merge_factor};
      const auto est = estimate_k(xs, k_max, config.threshold_factor,
                                  derive_seed(config.seed, "estimate-k"), opts);
      // The matching needs every known category to find a partner.
      return std::max(est, M);
    }
  }
  return view.label_space.K();
}

TrainState initialize(const TrainingView& view, const Config& config) {
  config.validate();
  view.label_space.validate();
  if (view.labeled.empty()) throw EmptyInputError("no labeled data");
  if (view.unlabeled.empty()) throw EmptyInputError("no unlabeled data");

  const auto batch = TrainingBatch::from_view(view);
  const std::size_t d = batch.labeled_x.front().dim();
  const std::size_t K = resolve_k(view, config);

  TrainState state;
  state.head = ProjectionHead::identity(d, d, config.activation);
  const auto z_l = state.head.forward(batch.labeled_x);
  state.P_l = class_means(z_l, batch.labeled_targets, view.label_space.known_ids);
  if (config.ce_head == CeHead::linear) {
    state.classifier = LinearClassifier::zeros(view.label_space.M(), d);
  }
  cluster_and_align(state, batch, config, K, derive_seed(config.seed, "train/cluster"));
  return state;
}

void train_epoch(TrainState& state, const TrainingBatch& batch, const Config& config,
                 std::vector<double>& velocity) {
  if (config.recluster_period > 0 && state.epoch > 0 &&
      state.epoch % config.recluster_period == 0) {
    cluster_and_align(state, batch, config, state.P_u.size(),
                      derive_seed(config.seed, "train/recluster/" + std::to_string(state.epoch)));
  }

  auto lg = total_loss(state, batch, config);
  state.loss_trace.push_back(lg.breakdown);

  // Flat parameter order: W, b, classifier V, classifier c.
  std::vector<double*> params;
  std::vector<const double*> grads;
  auto bind = [&](std::vector<double>& p, const std::vector<double>& g) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      params.push_back(&p[i]);
      grads.push_back(&g[i]);
    }
  };
  bind(state.head.W, lg.head.W);
  bind(state.head.b, lg.head.b);
  if (state.classifier) {
    bind(state.classifier->V, lg.classifier_V);
    bind(state.classifier->c, lg.classifier_c);
  }
  velocity.resize(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = config.momentum * velocity[i] + *grads[i];
    *params[i] -= config.learning_rate * velocity[i];
  }

  const auto z_l = state.head.forward(batch.labeled_x);
  auto fresh = class_means(z_l, batch.labeled_targets, state.P_l.category_keys);
  state.P_l =
      config.ablation.no_ema ? std::move(fresh) : ema_update(state.P_l, fresh, config.alpha);
  ++state.epoch;
}

TrainState train(const TrainingView& view, const Config& config) {
  auto state = initialize(view, config);
  const auto batch = TrainingBatch::from_view(view);
  std::vector<double> velocity;
  for (int e = 0; e < config.epochs; ++e) train_epoch(state, batch, config, velocity);
  return state;
}

TrainState train(const Dataset& dataset, const Config& config) {
  return train(dataset.training_view(), config);
}

void write_loss_trace_tsv(std::ostream& out, std::span<const LossBreakdown> trace) {
  out << "epoch\tspl_novel\tspl_known\tce\treg\ttotal\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    const auto& b = trace[e];
    out << e << '\t' << format_double(b.spl_novel) << '\t' << format_double(b.spl_known) << '\t'
        << format_double(b.ce) << '\t' << format_double(b.reg) << '\t' << format_double(b.total)
        << '\n';
  }
}

// Checkpoint layout (one record per line, tab-separated values):
//
//   protodisc-checkpoint 1
//   activation <identity|tanh>
//   head <d_in> <d_out>
//   W <d_in*d_out values>            row-major
//   b <d_out values>
//   epoch <n>
//   labeled <M> <dim>
//   proto <key> <dim values>         M times
//   unlabeled <K> <dim>
//   proto - <dim values>             K times
//   matching <M> <K>
//   permutation <M indices>
//   total_cost <value>
//   cost <K values>                  M times
//   classifier none | classifier <classes> <dim>, then V and c records
namespace {

void write_values(std::ostream& out, const char* tag, std::span<const double> v) {
  out << tag;
  for (double x : v) out << '\t' << format_double(x);
  out << '\n';
}

void write_protos(std::ostream& out, const char* tag, const PrototypeSet& p) {
  out << tag << '\t' << p.size() << '\t' << p.dim() << '\n';
  for (std::size_t k = 0; k < p.size(); ++k) {
    out << "proto\t" << (p.category_keys.empty() ? std::string("-") : p.category_keys[k]);
    for (double x : p.prototypes[k]) out << '\t' << format_double(x);
    out << '\n';
  }
}

class RecordReader {
 public:
  explicit RecordReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(std::string_view expected_tag) {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      std::vector<std::string> fields;
      for (auto f : split(line, '\t')) fields.emplace_back(f);
      if (fields.front() != expected_tag) {
        throw SchemaError("checkpoint: expected '" + std::string(expected_tag) + "', got '" +
                          fields.front() + "'");
      }
      fields.erase(fields.begin());
      return fields;
    }
    throw SchemaError("checkpoint: truncated before '" + std::string(expected_tag) + "'");
  }

 private:
  std::istream& in_;
};

std::size_t to_size(const std::string& s) {
  const auto v = parse_int(s, "checkpoint size");
  if (v < 0) throw SchemaError("checkpoint: negative size");
  return static_cast<std::size_t>(v);
}

std::vector<double> to_values(const std::vector<std::string>& f, std::size_t from,
                              std::size_t count) {
  if (f.size() != from + count) throw SchemaError("checkpoint: wrong number of values");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = parse_double(f[from + i], "checkpoint value");
  return out;
}

PrototypeSet read_protos(RecordReader& r, const char* tag, PrototypeKind kind) {
  const auto head = r.next(tag);
  if (head.size() != 2) throw SchemaError("checkpoint: bad prototype header");
  const auto n = to_size(head[0]);
  const auto dim = to_size(head[1]);
  PrototypeSet p;
  p.kind = kind;
  for (std::size_t k = 0; k < n; ++k) {
    const auto f = r.next("proto");
    if (f.empty()) throw SchemaError("checkpoint: empty prototype record");
    if (kind == PrototypeKind::labeled) p.category_keys.push_back(f[0]);
    p.prototypes.emplace_back(to_values(f, 1, dim));
  }
  return p;
}

}  // namespace

void write_checkpoint(std::ostream& out, const TrainState& s) {
  out << "protodisc-checkpoint\t1\n";
  out << "activation\t" << to_string(s.head.activation) << '\n';
  out << "head\t" << s.head.d_in << '\t' << s.head.d_out << '\n';
  write_values(out, "W", s.head.W);
  write_values(out, "b", s.head.b);
  out << "epoch\t" << s.epoch << '\n';
  write_protos(out, "labeled", s.P_l);
  write_protos(out, "unlabeled", s.P_u);
  out << "matching\t" << s.matching.cost_matrix.rows() << '\t' << s.matching.cost_matrix.cols()
      << '\n';
  out << "permutation";
  for (auto p : s.matching.permutation) out << '\t' << p;
  out << '\n';
  out << "total_cost\t" << format_double(s.matching.total_cost) << '\n';
  for (std::size_t i = 0; i < s.matching.cost_matrix.rows(); ++i) {
    write_values(out, "cost", s.matching.cost_matrix.row(i));
  }
  if (s.classifier) {
    out << "classifier\t" << s.classifier->classes << '\t' << s.classifier->dim << '\n';
    write_values(out, "V", s.classifier->V);
    write_values(out, "c", s.classifier->c);
  } else {
    out << "classifier\tnone\n";
  }
}

void write_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create checkpoint " + path.string());
  write_checkpoint(out, state);
  out.flush();
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

TrainState read_checkpoint(std::istream& in) {
  RecordReader r(in);
  const auto magic = r.next("protodisc-checkpoint");
  if (magic.size() != 1 || magic[0] != "1") throw SchemaError("checkpoint: unsupported version");

  TrainState s;
  const auto act = r.next("activation");
  if (act.size() != 1) throw SchemaError("checkpoint: bad activation record");
  if (act[0] == "identity")
    s.head.activation = Activation::identity;
  else if (act[0] == "tanh")
    s.head.activation = Activation::tanh;
  else
    throw SchemaError("checkpoint: unknown activation '" + act[0] + "'");

  const auto shape = r.next("head");
  if (shape.size() != 2) throw SchemaError("checkpoint: bad head record");
  s.head.d_in = to_size(shape[0]);
  s.head.d_out = to_size(shape[1]);
  s.head.W = to_values(r.next("W"), 0, s.head.d_in * s.head.d_out);
  s.head.b = to_values(r.next("b"), 0, s.head.d_out);
  const auto epoch = r.next("epoch");
  if (epoch.size() != 1) throw SchemaError("checkpoint: bad epoch record");
  s.epoch = static_cast<int>(to_size(epoch[0]));

  s.P_l = read_protos(r, "labeled", PrototypeKind::labeled);
  s.P_u = read_protos(r, "unlabeled", PrototypeKind::unlabeled);

  const auto mshape = r.next("matching");
  if (mshape.size() != 2) throw SchemaError("checkpoint: bad matching record");
  const auto M = to_size(mshape[0]);
  const auto K = to_size(mshape[1]);
  const auto perm = r.next("permutation");
  if (perm.size() != M) throw SchemaError("checkpoint: permutation length mismatch");
  for (const auto& p : perm) s.matching.permutation.push_back(to_size(p));
  s.matching.total_cost = to_values(r.next("total_cost"), 0, 1)[0];
  s.matching.cost_matrix = Matrix(M, K);
  for (std::size_t i = 0; i < M; ++i) {
    const auto row = to_values(r.next("cost"), 0, K);
    for (std::size_t j = 0; j < K; ++j) s.matching.cost_matrix(i, j) = row[j];
  }
  s.matching.matched_unlabeled = s.matching.permutation;
  std::vector<bool> taken(K, false);
  for (auto c : s.matching.permutation) {
    if (c >= K) throw SchemaError("checkpoint: permutation index out of range");
    taken[c] = true;
  }
  for (std::size_t c = 0; c < K; ++c) {
    if (!taken[c]) s.matching.unmatched_unlabeled.push_back(c);
  }

  const auto clf = r.next("classifier");
  if (clf.size() == 2) {
    LinearClassifier c;
    c.classes = to_size(clf[0]);
    c.dim = to_size(clf[1]);
    c.V = to_values(r.next("V"), 0, c.classes * c.dim);
    c.c = to_values(r.next("c"), 0, c.classes);
    s.classifier = std::move(c);
  } else if (clf.size() != 1 || clf[0] != "none") {
    throw SchemaError("checkpoint: bad classifier record");
  }
  return s;
}

TrainState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace protodisc
