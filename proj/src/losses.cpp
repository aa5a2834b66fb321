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

#include "protodisc/losses.hpp"

#include <algorithm>
#include <cmath>

#include "protodisc/errors.hpp"

namespace protodisc {

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0)) throw ConfigError("temperature tau must be > 0");
}

void require_inputs(std::span<const Vector> z, const PrototypeSet& p) {
  if (z.empty()) throw EmptyInputError("loss over zero instances");
  if (p.size() == 0) throw EmptyInputError("loss over zero prototypes");
  for (const auto& x : z) require_same_dim(x, p.prototypes.front());
}

void require_nonzero(std::span<const Vector> z, const PrototypeSet& p) {
  for (const auto& x : z) {
    if (norm(x) == 0.0) throw ZeroNormError("zero-norm embedding");
  }
  for (const auto& m : p.prototypes) {
    if (norm(m) == 0.0) throw ZeroNormError("zero-norm prototype");
  }
}

// Cosine similarity and its gradient with respect to z:
//   d cos / dz = mu / (|z||mu|) - cos * z / |z|^2
struct CosTerm {
  double value;
  std::vector<double> grad;
};

CosTerm cos_with_grad(const Vector& z, const Vector& mu) {
  const double nz = norm(z);
  const double nm = norm(mu);
  const double c = dot(z, mu) / (nz * nm);
  CosTerm out{c, std::vector<double>(z.dim())};
  const double a = 1.0 / (nz * nm);
  const double b = c / (nz * nz);
  for (std::size_t j = 0; j < z.dim(); ++j) out.grad[j] = a * mu[j] - b * z[j];
  return out;
}

enum class SoftDistance { euclidean, cosine };

// Shared kernel for the soft-assignment losses. Per instance
//   L_i = sum_k w_k d_k,  w = softmax(s / tau) or uniform
//   dL_i/dz = sum_k w_k dd_k + (1/tau) sum_k w_k (d_k - L_i) ds_k
// where the second term is the derivative of the softmax weights.
LossResult soft_assignment_loss(std::span<const Vector> z, const PrototypeSet& protos, double tau,
                                const SoftAssignOptions& opt, SoftDistance distance) {
  require_tau(tau);
  require_inputs(z, protos);
  require_nonzero(z, protos);

  const std::size_t n = z.size();
  const std::size_t K = protos.size();
  const std::size_t dim = protos.dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  LossResult out;
  out.grad.reserve(n);
  std::vector<CosTerm> cos(K);
  std::vector<double> d(K), scores(K), w(K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      cos[k] = cos_with_grad(z[i], protos.prototypes[k]);
      d[k] = distance == SoftDistance::euclidean ? euclidean_distance(z[i], protos.prototypes[k])
                                                 : 1.0 - cos[k].value;
      scores[k] = cos[k].value / tau;
    }
    if (opt.weighting == Weighting::semantic) {
      w = softmax(scores);
    } else {
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(K));
    }
    double li = 0.0;
    for (std::size_t k = 0; k < K; ++k) li += w[k] * d[k];
    out.loss += li;

    std::vector<double> g(dim, 0.0);
    const bool through_weights = opt.weighting == Weighting::semantic && !opt.detach_weights;
    for (std::size_t k = 0; k < K; ++k) {
      if (distance == SoftDistance::euclidean) {
        if (d[k] > 0.0) {
          const double s = w[k] / d[k];
          const Vector& mu = protos.prototypes[k];
          for (std::size_t j = 0; j < dim; ++j) g[j] += s * (z[i][j] - mu[j]);
        }
      } else {
        for (std::size_t j = 0; j < dim; ++j) g[j] -= w[k] * cos[k].grad[j];
      }
      if (through_weights) {
        const double s = w[k] * (d[k] - li) / tau;
        for (std::size_t j = 0; j < dim; ++j) g[j] += s * cos[k].grad[j];
      }
    }
    for (double& v : g) v *= inv_n;
    out.grad.emplace_back(std::move(g));
  }
  out.loss *= inv_n;
  return out;
}

// Mean negative log-likelihood of `targets` under softmax(logits), where the
// logits and their z-gradients come from `logit_fn`.
template <typename LogitFn>
LossResult nll_loss(std::span<const Vector> z, std::span<const std::size_t> targets,
                    std::size_t classes, LogitFn&& logit_fn) {
  if (z.empty()) throw EmptyInputError("loss over zero instances");
  if (targets.size() != z.size()) throw ShapeError("targets and embeddings differ in length");
  const double inv_n = 1.0 / static_cast<double>(z.size());
  LossResult out;
  std::vector<double> logits(classes);
  std::vector<std::vector<double>> logit_grads(classes);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (targets[i] >= classes) throw LabelError("target index out of range");
    logit_fn(z[i], logits, logit_grads);
    const auto p = softmax(logits);
    // log-sum-exp minus the target logit; log1p keeps e^{-D} tails accurate.
    const auto top =
        static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    double tail = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      if (k != top) tail += std::exp(logits[k] - logits[top]);
    }
    out.loss += logits[top] + std::log1p(tail) - logits[targets[i]];
    std::vector<double> g(z[i].dim(), 0.0);
    for (std::size_t k = 0; k < classes; ++k) {
      const double coef = p[k] - (k == targets[i] ? 1.0 : 0.0);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += coef * logit_grads[k][j];
    }
    for (double& v : g) v *= inv_n;
    out.grad.emplace_back(std::move(g));
  }
  out.loss *= inv_n;
  return out;
}

}  // namespace

std::vector<std::vector<double>> semantic_weights(std::span<const Vector> embeddings,
                                                  const PrototypeSet& prototypes, double tau) {
  require_tau(tau);
  require_inputs(embeddings, prototypes);
  require_nonzero(embeddings, prototypes);
  std::vector<std::vector<double>> out;
  out.reserve(embeddings.size());
  std::vector<double> scores(prototypes.size());
  for (const auto& z : embeddings) {
    for (std::size_t k = 0; k < prototypes.size(); ++k) {
      scores[k] = cos_with_grad(z, prototypes.prototypes[k]).value / tau;
    }
    out.push_back(softmax(scores));
  }
  return out;
}

LossResult spl_loss(std::span<const Vector> embeddings, const PrototypeSet& prototypes, double tau,
                    const SoftAssignOptions& options) {
  return soft_assignment_loss(embeddings, prototypes, tau, options, SoftDistance::euclidean);
}

LossResult reg_loss(std::span<const Vector> embeddings, const PrototypeSet& labeled, double tau,
                    const SoftAssignOptions& options) {
  return soft_assignment_loss(embeddings, labeled, tau, options, SoftDistance::cosine);
}

LossResult pl_loss(std::span<const Vector> embeddings, std::span<const std::size_t> assignments,
                   const PrototypeSet& prototypes) {
  require_inputs(embeddings, prototypes);
  const std::size_t K = prototypes.size();
  // logit_k = -||z - mu_k||, d logit_k / dz = -(z - mu_k) / ||z - mu_k||.
  return nll_loss(
      embeddings, assignments, K,
      [&](const Vector& z, std::vector<double>& logits, std::vector<std::vector<double>>& grads) {
        for (std::size_t k = 0; k < K; ++k) {
          const Vector& mu = prototypes.prototypes[k];
          const double d = euclidean_distance(z, mu);
          logits[k] = -d;
          grads[k].assign(z.dim(), 0.0);
          if (d > 0.0) {
            for (std::size_t j = 0; j < z.dim(); ++j) grads[k][j] = -(z[j] - mu[j]) / d;
          }
        }
      });
}

LossResult ce_loss(std::span<const Vector> embeddings, std::span<const std::size_t> targets,
                   const PrototypeSet& labeled, double tau) {
  require_tau(tau);
  require_inputs(embeddings, labeled);
  require_nonzero(embeddings, labeled);
  const std::size_t M = labeled.size();
  return nll_loss(
      embeddings, targets, M,
      [&](const Vector& z, std::vector<double>& logits, std::vector<std::vector<double>>& grads) {
        for (std::size_t k = 0; k < M; ++k) {
          auto c = cos_with_grad(z, labeled.prototypes[k]);
          logits[k] = c.value / tau;
          for (double& v : c.grad) v /= tau;
          grads[k] = std::move(c.grad);
        }
      });
}

LossResult ce_loss(std::span<const Vector> embeddings, std::span<const std::string> labels,
                   const PrototypeSet& labeled, double tau) {
  std::vector<std::size_t> targets;
  targets.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::find(labeled.category_keys.begin(), labeled.category_keys.end(), l);
    if (it == labeled.category_keys.end()) {
      throw LabelError("label '" + l + "' has no labeled prototype");
    }
    targets.push_back(static_cast<std::size_t>(it - labeled.category_keys.begin()));
  }
  return ce_loss(embeddings, targets, labeled, tau);
}

LinearClassifier LinearClassifier::zeros(std::size_t classes, std::size_t dim) {
  return {classes, dim, std::vector<double>(classes * dim, 0.0), std::vector<double>(classes, 0.0)};
}

LinearCeResult ce_loss_linear(std::span<const Vector> embeddings,
                              std::span<const std::size_t> targets, const LinearClassifier& clf) {
  for (const auto& z : embeddings) {
    if (z.dim() != clf.dim) throw DimensionError("classifier dim mismatch");
  }
  LinearCeResult out;
  out.embedding = nll_loss(
      embeddings, targets, clf.classes,
      [&](const Vector& z, std::vector<double>& logits, std::vector<std::vector<double>>& grads) {
        for (std::size_t k = 0; k < clf.classes; ++k) {
          const double* row = &clf.V[k * clf.dim];
          double s = clf.c[k];
          for (std::size_t j = 0; j < clf.dim; ++j) s += row[j] * z[j];
          logits[k] = s;
          grads[k].assign(row, row + clf.dim);
        }
      });
  // Parameter gradients: dL/dV_k = (p_k - y_k) z / n, dL/dc_k = (p_k - y_k) / n.
  out.grad_V.assign(clf.V.size(), 0.0);
  out.grad_c.assign(clf.c.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(embeddings.size());
  std::vector<double> logits(clf.classes);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const Vector& z = embeddings[i];
    for (std::size_t k = 0; k < clf.classes; ++k) {
      double s = clf.c[k];
      for (std::size_t j = 0; j < clf.dim; ++j) s += clf.V[k * clf.dim + j] * z[j];
      logits[k] = s;
    }
    const auto p = softmax(logits);
    for (std::size_t k = 0; k < clf.classes; ++k) {
      const double coef = (p[k] - (k == targets[i] ? 1.0 : 0.0)) * inv_n;
      for (std::size_t j = 0; j < clf.dim; ++j) out.grad_V[k * clf.dim + j] += coef * z[j];
      out.grad_c[k] += coef;
    }
  }
  return out;
}

}  // namespace protodisc
