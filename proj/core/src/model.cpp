/*
 * Copyright 2026 Breaker Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "breaker/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "breaker/error.hpp"
#include "breaker/layers.hpp"

namespace breaker {

Variant variant_from_string(const std::string& s) {
  if (s == "breaker") return Variant::kBreaker;
  if (s == "breaker1-") return Variant::kBreaker1Minus;
  if (s == "breaker2-") return Variant::kBreaker2Minus;
  throw ConfigError("unknown variant '" + s +
                    "' (expected breaker, breaker1-, breaker2-)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kBreaker: return "breaker";
    case Variant::kBreaker1Minus: return "breaker1-";
    case Variant::kBreaker2Minus: return "breaker2-";
  }
  return "breaker";
}

MixtureSpec MixtureSpec::for_variant(Variant v) {
  return v == Variant::kBreaker1Minus ? uniform() : soft_assign();
}

void ModelDims::validate() const {
  if (user_cardinalities.empty()) {
    throw ConfigError("model: at least one user feature is required");
  }
  for (std::size_t c : user_cardinalities) {
    if (c == 0) throw ConfigError("model: zero feature cardinality");
  }
  if (n_items == 0) throw ConfigError("model: n_items must be >= 1");
  if (embedding_dim == 0) throw ConfigError("model: embedding_dim must be >= 1");
  if (clusters == 0) throw ConfigError("model: cluster count must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("model: alpha must be > 0");
}

// -- Clustering primitives ---------------------------------------------------

Tensor soft_assign(const Tensor& reps, const Tensor& centroids, double alpha,
                   Tensor* kernel_out) {
  if (reps.cols() != centroids.cols()) {
    throw ConfigError("soft_assign: representation width " +
                      shape_str(reps.shape) + " != centroid width " +
                      shape_str(centroids.shape));
  }
  const std::size_t n = reps.rows();
  const std::size_t k = centroids.rows();
  const std::size_t d = reps.cols();
  const double expo = -(alpha + 1.0) / 2.0;
  Tensor q({n, k});
  Tensor kernel({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    const double* e = reps.values.data() + i * d;
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double* mu = centroids.values.data() + j * d;
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = e[c] - mu[c];
        dist2 += diff * diff;
      }
      const double s = std::pow(1.0 + dist2 / alpha, expo);
      kernel.at(i, j) = s;
      sum += s;
    }
    for (std::size_t j = 0; j < k; ++j) q.at(i, j) = kernel.at(i, j) / sum;
  }
  if (kernel_out) *kernel_out = std::move(kernel);
  return q;
}

Tensor target_distribution(const Tensor& q) {
  const std::size_t n = q.rows();
  const std::size_t k = q.cols();
  // With a single row, f_j == q_j and the square normalization is the
  // identity; return the input to keep the equality exact.
  if (n == 1) return q;
  std::vector<double> f(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) f[j] += q.at(i, j);
  }
  Tensor p({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = q.at(i, j) * q.at(i, j) / f[j];
      p.at(i, j) = w;
      sum += w;
    }
    for (std::size_t j = 0; j < k; ++j) p.at(i, j) /= sum;
  }
  return p;
}

double clustering_loss(const Tensor& p, const Tensor& q, Tensor* dq) {
  if (!p.same_shape(q)) {
    throw ConfigError("clustering_loss: P " + shape_str(p.shape) + " vs Q' " +
                      shape_str(q.shape));
  }
  double loss = 0.0;
  if (dq) *dq = Tensor(q.shape);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi > 0.0) {
      loss += pi * std::log(pi / q[i]);
      if (dq) dq->values[i] = -pi / q[i];
    }
  }
  return loss;
}

double aggregate(std::span<const double> tower_scores,
                 std::span<const double> weights) {
  if (tower_scores.size() != weights.size() || tower_scores.empty()) {
    throw ConfigError("aggregate: " + std::to_string(tower_scores.size()) +
                      " scores vs " + std::to_string(weights.size()) +
                      " weights");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < tower_scores.size(); ++k) {
    acc += tower_scores[k] * weights[k];
  }
  return acc;
}

double classification_loss(std::span<const double> y_hat,
                           std::span<const int> labels,
                           std::vector<double>* dy_hat) {
  if (y_hat.size() != labels.size() || y_hat.empty()) {
    throw ConfigError("classification_loss: " + std::to_string(y_hat.size()) +
                      " predictions vs " + std::to_string(labels.size()) +
                      " labels");
  }
  const double n = static_cast<double>(y_hat.size());
  double loss = 0.0;
  if (dy_hat) dy_hat->assign(y_hat.size(), 0.0);
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) {
      throw ConfigError("classification_loss: label " + std::to_string(y) +
                        " at row " + std::to_string(i) + " is not 0/1");
    }
    const double v = std::clamp(y_hat[i], kProbClamp, 1.0 - kProbClamp);
    loss -= y == 1 ? std::log(v) : std::log(1.0 - v);
    if (dy_hat) {
      (*dy_hat)[i] = (y == 1 ? -1.0 / v : 1.0 / (1.0 - v)) / n;
    }
  }
  return loss / n;
}

ClusterGrads closed_form_cluster_gradients(const Tensor& reps,
                                           const Tensor& centroids,
                                           const Tensor& p, const Tensor& q,
                                           double alpha) {
  const std::size_t n = reps.rows();
  const std::size_t k = centroids.rows();
  const std::size_t d = reps.cols();
  const double scale = (alpha + 1.0) / alpha;
  ClusterGrads out;
  out.d_reps = Tensor(reps.shape);
  out.d_centroids = Tensor(centroids.shape);
  for (std::size_t i = 0; i < n; ++i) {
    const double* e = reps.values.data() + i * d;
    double* ge = out.d_reps.values.data() + i * d;
    for (std::size_t j = 0; j < k; ++j) {
      const double* mu = centroids.values.data() + j * d;
      double* gmu = out.d_centroids.values.data() + j * d;
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = e[c] - mu[c];
        dist2 += diff * diff;
      }
      const double w =
          scale * (p.at(i, j) - q.at(i, j)) / (1.0 + dist2 / alpha);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = e[c] - mu[c];
        ge[c] += w * diff;
        gmu[c] -= w * diff;
      }
    }
  }
  return out;
}

ClusterGrads soft_assign_backward(const Tensor& reps, const Tensor& centroids,
                                  const Tensor& kernel, const Tensor& q,
                                  const Tensor& dq, double alpha) {
  const std::size_t n = reps.rows();
  const std::size_t k = centroids.rows();
  const std::size_t d = reps.cols();
  const double scale = (alpha + 1.0) / alpha;
  ClusterGrads out;
  out.d_reps = Tensor(reps.shape);
  out.d_centroids = Tensor(centroids.shape);
  for (std::size_t i = 0; i < n; ++i) {
    const double* e = reps.values.data() + i * d;
    double* ge = out.d_reps.values.data() + i * d;
    double row_sum = 0.0;   // sum of kernel values, normalizer of row i
    double dot = 0.0;       // sum_j dq_ij q_ij
    for (std::size_t j = 0; j < k; ++j) {
      row_sum += kernel.at(i, j);
      dot += dq.at(i, j) * q.at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double* mu = centroids.values.data() + j * d;
      double* gmu = out.d_centroids.values.data() + j * d;
      // dL/ds_ij through the row normalization
      const double ds = (dq.at(i, j) - dot) / row_sum;
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = e[c] - mu[c];
        dist2 += diff * diff;
      }
      // ds_ij/de = -scale * s_ij / (1 + dist2/alpha) * (e - mu)
      const double w = -scale * kernel.at(i, j) / (1.0 + dist2 / alpha) * ds;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = e[c] - mu[c];
        ge[c] += w * diff;
        gmu[c] -= w * diff;
      }
    }
  }
  return out;
}

// -- BreakerNet ---------------------------------------------------------------

BreakerNet::BreakerNet(ModelDims dims) : dims_(std::move(dims)) {
  dims_.validate();
  const std::size_t m = dims_.user_cardinalities.size();
  user_mlp_ = Mlp("rem.user", m * dims_.embedding_dim, dims_.rem_widths);
  item_mlp_ = Mlp("rem.item", dims_.embedding_dim, dims_.rem_widths);
  const std::size_t tower_in = dims_.user_rep_dim() + dims_.item_rep_dim();
  std::vector<std::size_t> tower_layers = dims_.tower_widths;
  tower_layers.push_back(1);
  towers_.reserve(dims_.clusters);
  for (std::size_t k = 0; k < dims_.clusters; ++k) {
    towers_.emplace_back("tower." + std::to_string(k), tower_in, tower_layers);
  }
  for (std::size_t f = 0; f < m; ++f) target_names_.push_back(user_table_name(f));
  for (std::size_t l = 0; l < user_mlp_.layer_count(); ++l) {
    target_names_.push_back(user_mlp_.weight_name(l));
    target_names_.push_back(user_mlp_.bias_name(l));
  }
}

std::string BreakerNet::user_table_name(std::size_t feature) const {
  return "emb.user." + std::to_string(feature);
}

ParamSet BreakerNet::init_params(std::uint64_t seed) const {
  Rng rng(seed);
  ParamSet ps;
  // Embedding scale 0.1 keeps initial representations within the unit scale
  // the Student-t kernel discriminates on; see Mlp::init_params.
  for (std::size_t f = 0; f < dims_.user_cardinalities.size(); ++f) {
    Tensor table({dims_.user_cardinalities[f], dims_.embedding_dim});
    for (double& w : table.values) w = rng.normal(0.0, 0.1);
    ps.add(user_table_name(f), std::move(table));
  }
  Tensor item_table({dims_.n_items, dims_.embedding_dim});
  for (double& w : item_table.values) w = rng.normal(0.0, 0.1);
  ps.add(item_table_name(), std::move(item_table));
  user_mlp_.init_params(ps, rng);
  item_mlp_.init_params(ps, rng);
  for (const Mlp& t : towers_) t.init_params(ps, rng);
  ps.add(kCentroids, Tensor({dims_.clusters, dims_.user_rep_dim()}));
  return ps;
}

ParamSet BreakerNet::zero_params() const {
  // Same structure as init_params without consuming randomness.
  Rng rng(0);
  ParamSet ps = init_params(0);
  for (auto& [name, t] : ps) {
    std::fill(t.values.begin(), t.values.end(), 0.0);
  }
  return ps;
}

ParamSet BreakerNet::make_target(const ParamSet& params) const {
  ParamSet target;
  for (const std::string& name : target_names_) {
    target.add(name, params.at(name));
  }
  return target;
}

void BreakerNet::sync_target(const ParamSet& params, ParamSet& target) const {
  for (const std::string& name : target_names_) {
    const Tensor& src = params.at(name);
    Tensor& dst = target.at(name);
    if (!dst.same_shape(src)) {
      throw ConfigError("sync_target: shape " + shape_str(dst.shape) +
                        " != " + shape_str(src.shape) + " for " + name);
    }
    dst.values = src.values;
  }
}

Tensor BreakerNet::user_reps(const ParamSet& ps, std::span<const int> features,
                             std::size_t n, std::vector<MlpCache>* caches,
                             Tensor* x_out) const {
  const std::size_t m = dims_.user_cardinalities.size();
  const std::size_t d = dims_.embedding_dim;
  if (features.size() != n * m) {
    throw ConfigError("user_reps: expected " + std::to_string(n * m) +
                      " feature indices, got " +
                      std::to_string(features.size()));
  }
  Tensor reps({n, dims_.user_rep_dim()});
  if (caches) caches->assign(n, {});
  if (x_out) *x_out = Tensor({n, m * d});
  std::vector<double> x(m * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < m; ++f) {
      const Tensor emb = embedding_lookup(
          ps.at(user_table_name(f)), features.subspan(i * m + f, 1));
      std::copy(emb.values.begin(), emb.values.end(), x.begin() + f * d);
    }
    if (x_out) std::copy(x.begin(), x.end(), x_out->row(i).begin());
    const std::vector<double> e =
        user_mlp_.forward(ps, x, caches ? &(*caches)[i] : nullptr);
    std::copy(e.begin(), e.end(), reps.row(i).begin());
  }
  return reps;
}

Tensor BreakerNet::item_reps(const ParamSet& ps, std::span<const int> item_ids,
                             std::size_t n, std::vector<MlpCache>* caches,
                             Tensor* x_out) const {
  Tensor reps({n, dims_.item_rep_dim()});
  if (caches) caches->assign(n, {});
  if (x_out) *x_out = Tensor({n, dims_.embedding_dim});
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor x =
        embedding_lookup(ps.at(item_table_name()), item_ids.subspan(i, 1));
    if (x_out) std::copy(x.values.begin(), x.values.end(), x_out->row(i).begin());
    const std::vector<double> e =
        item_mlp_.forward(ps, x.values, caches ? &(*caches)[i] : nullptr);
    std::copy(e.begin(), e.end(), reps.row(i).begin());
  }
  return reps;
}

BatchCache BreakerNet::forward(const ParamSet& ps, const BatchView& batch,
                               const MixtureSpec& mix) const {
  const std::size_t n = batch.n;
  const std::size_t k = dims_.clusters;
  if (n == 0) throw ConfigError("forward: empty batch");
  BatchCache cache;
  cache.n = n;
  cache.e_u = user_reps(ps, batch.user_features, n, &cache.user_cache,
                        &cache.x_u);
  cache.e_i = item_reps(ps, batch.item_ids, n, &cache.item_cache, &cache.x_i);
  cache.mixture_detached = mix.detached();
  switch (mix.mode) {
    case MixtureSpec::kSoftAssign:
      cache.mixture =
          soft_assign(cache.e_u, ps.at(kCentroids), dims_.alpha, &cache.kernel);
      break;
    case MixtureSpec::kUniform: {
      cache.mixture = Tensor({n, k});
      const double w = 1.0 / static_cast<double>(k);
      std::fill(cache.mixture.values.begin(), cache.mixture.values.end(), w);
      break;
    }
    case MixtureSpec::kFixed: {
      if (mix.fixed.size() != k) {
        throw ConfigError("fixed mixture has " +
                          std::to_string(mix.fixed.size()) + " weights, want " +
                          std::to_string(k));
      }
      cache.mixture = Tensor({n, k});
      for (std::size_t i = 0; i < n; ++i) {
        std::copy(mix.fixed.begin(), mix.fixed.end(),
                  cache.mixture.row(i).begin());
      }
      break;
    }
  }
  cache.tower_scores = Tensor({n, k});
  cache.tower_logits = Tensor({n, k});
  cache.tower_cache.assign(k, std::vector<MlpCache>(n));
  const std::size_t du = dims_.user_rep_dim();
  const std::size_t di = dims_.item_rep_dim();
  std::vector<double> e_in(du + di);
  cache.y_hat.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(cache.e_u.row(i).begin(), cache.e_u.row(i).end(), e_in.begin());
    std::copy(cache.e_i.row(i).begin(), cache.e_i.row(i).end(),
              e_in.begin() + du);
    for (std::size_t t = 0; t < k; ++t) {
      const std::vector<double> out =
          towers_[t].forward(ps, e_in, &cache.tower_cache[t][i]);
      cache.tower_logits.at(i, t) = out[0];
      cache.tower_scores.at(i, t) = sigmoid_scalar(out[0]);
    }
    const double agg = aggregate(cache.tower_scores.row(i), cache.mixture.row(i));
    cache.y_hat[i] = std::clamp(agg, kProbClamp, 1.0 - kProbClamp);
  }
  return cache;
}

BatchLoss BreakerNet::backward(const ParamSet& ps, const BatchView& batch,
                               const BatchCache& cache,
                               const Tensor* pseudo_labels, double lambda,
                               GradMap& grads,
                               std::span<const double> dLdy_override) const {
  const std::size_t n = cache.n;
  const std::size_t k = dims_.clusters;
  BatchLoss bl;
  std::vector<double> dy;
  bl.loss_p = classification_loss(cache.y_hat, batch.labels, &dy);
  if (!dLdy_override.empty()) {
    if (dLdy_override.size() != n) {
      throw ConfigError("dLdy override size mismatch");
    }
    dy.assign(dLdy_override.begin(), dLdy_override.end());
  }

  Tensor dq({n, k});
  if (!cache.mixture_detached) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < k; ++t) {
        dq.at(i, t) = dy[i] * cache.tower_scores.at(i, t);
      }
    }
  }
  if (pseudo_labels) {
    if (cache.mixture_detached) {
      throw ConfigError("clustering loss requires the soft-assign mixture");
    }
    Tensor dq_cluster;
    bl.loss_c = clustering_loss(*pseudo_labels, cache.mixture, &dq_cluster);
    if (lambda != 0.0) {
      for (std::size_t i = 0; i < dq.size(); ++i) {
        dq[i] += lambda * dq_cluster[i];
      }
    }
  }
  bl.loss = total_loss(bl.loss_p, bl.loss_c, lambda);

  const std::size_t du = dims_.user_rep_dim();
  const std::size_t di = dims_.item_rep_dim();
  Tensor d_eu({n, du});
  Tensor d_ei({n, di});

  // Tower paths. A tower whose upstream is identically zero contributes
  // nothing and is skipped; its gradient stays an implicit zero.
  std::vector<double> upstream(n);
  for (std::size_t t = 0; t < k; ++t) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      upstream[i] = dy[i] * cache.mixture.at(i, t);
      any = any || upstream[i] != 0.0;
    }
    if (!any) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (upstream[i] == 0.0) continue;
      const double s = cache.tower_scores.at(i, t);
      const double dlogit = upstream[i] * s * (1.0 - s);
      const std::vector<double> g{dlogit};
      const std::vector<double> d_in =
          towers_[t].backward(ps, cache.tower_cache[t][i], g, grads);
      double* eu = d_eu.values.data() + i * du;
      double* ei = d_ei.values.data() + i * di;
      for (std::size_t c = 0; c < du; ++c) eu[c] += d_in[c];
      for (std::size_t c = 0; c < di; ++c) ei[c] += d_in[du + c];
    }
  }

  // Mixture path into representations and centroids.
  if (!cache.mixture_detached) {
    const ClusterGrads cg =
        soft_assign_backward(cache.e_u, ps.at(kCentroids), cache.kernel,
                             cache.mixture, dq, dims_.alpha);
    for (std::size_t i = 0; i < d_eu.size(); ++i) d_eu[i] += cg.d_reps[i];
    grads.accumulate(kCentroids, cg.d_centroids);
  }

  // Representation stacks and embedding tables.
  const std::size_t m = dims_.user_cardinalities.size();
  const std::size_t ed = dims_.embedding_dim;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> dx =
        user_mlp_.backward(ps, cache.user_cache[i], d_eu.row(i), grads);
    for (std::size_t f = 0; f < m; ++f) {
      const Tensor& table = ps.at(user_table_name(f));
      Tensor& gt = grads.slot(user_table_name(f), table.shape);
      const auto idx =
          static_cast<std::size_t>(batch.user_features[i * m + f]);
      double* row = gt.values.data() + idx * ed;
      for (std::size_t c = 0; c < ed; ++c) row[c] += dx[f * ed + c];
    }
    const std::vector<double> dxi =
        item_mlp_.backward(ps, cache.item_cache[i], d_ei.row(i), grads);
    const Tensor& itable = ps.at(item_table_name());
    Tensor& git = grads.slot(item_table_name(), itable.shape);
    double* row =
        git.values.data() + static_cast<std::size_t>(batch.item_ids[i]) * ed;
    for (std::size_t c = 0; c < ed; ++c) row[c] += dxi[c];
  }
  return bl;
}

std::vector<RankedItem> BreakerNet::predict_rank(
    const ParamSet& ps, std::span<const int> user_features,
    std::span<const int> candidate_items, const MixtureSpec& mix) const {
  if (candidate_items.empty()) {
    throw ConfigError("predict_rank: no candidate items");
  }
  for (int id : candidate_items) {
    if (id < 0 || static_cast<std::size_t>(id) >= dims_.n_items) {
      throw std::out_of_range("predict_rank: unknown item id " +
                              std::to_string(id) + " (catalog size " +
                              std::to_string(dims_.n_items) + ")");
    }
  }
  const Tensor e_u = user_reps(ps, user_features, 1);
  Tensor weights;
  if (mix.mode == MixtureSpec::kSoftAssign) {
    weights = soft_assign(e_u, ps.at(kCentroids), dims_.alpha);
  } else if (mix.mode == MixtureSpec::kUniform) {
    weights = Tensor({1, dims_.clusters});
    std::fill(weights.values.begin(), weights.values.end(),
              1.0 / static_cast<double>(dims_.clusters));
  } else {
    weights = Tensor({1, dims_.clusters}, mix.fixed);
  }
  const std::size_t du = dims_.user_rep_dim();
  const std::size_t di = dims_.item_rep_dim();
  std::vector<double> e_in(du + di);
  std::copy(e_u.values.begin(), e_u.values.end(), e_in.begin());
  std::vector<RankedItem> ranked;
  ranked.reserve(candidate_items.size());
  for (int id : candidate_items) {
    const Tensor e_i = item_reps(ps, std::span<const int>(&id, 1), 1);
    std::copy(e_i.values.begin(), e_i.values.end(), e_in.begin() + du);
    double score = 0.0;
    for (std::size_t t = 0; t < towers_.size(); ++t) {
      const std::vector<double> out = towers_[t].forward(ps, e_in);
      score += sigmoid_scalar(out[0]) * weights[t];
    }
    ranked.push_back({id, score});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedItem& a, const RankedItem& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.item < b.item;
            });
  return ranked;
}

}  // namespace breaker
