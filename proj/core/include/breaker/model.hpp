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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "breaker/mlp.hpp"
#include "breaker/tensor.hpp"

namespace breaker {

// Predictions are clamped to [kProbClamp, 1 - kProbClamp] before the log
// loss.
inline constexpr double kProbClamp = 1e-7;

enum class Variant {
  kBreaker,        // full model
  kBreaker1Minus,  // no clustering task, uniform tower mixing
  kBreaker2Minus,  // target network synced every step
};

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

// Network structure. User and item field widths share the representation
// stack widths; tower widths list the hidden layers of each preference tower
// (a 1-unit linear output layer followed by a sigmoid is appended).
struct ModelDims {
  std::vector<std::size_t> user_cardinalities;
  std::size_t n_items = 0;
  std::size_t embedding_dim = 10;
  std::vector<std::size_t> rem_widths = {256, 64};
  std::vector<std::size_t> tower_widths = {32, 10};
  std::size_t clusters = 4;  // K
  double alpha = 1.0;        // Student-t degrees of freedom

  std::size_t user_rep_dim() const {
    return rem_widths.empty() ? user_cardinalities.size() * embedding_dim
                              : rem_widths.back();
  }
  std::size_t item_rep_dim() const {
    return rem_widths.empty() ? embedding_dim : rem_widths.back();
  }
  void validate() const;
};

// How the tower mixture obtains its weights.
struct MixtureSpec {
  enum Mode {
    kSoftAssign,  // Student-t soft assignment against the centroids
    kUniform,     // constant 1/K, no gradient through the weights
    kFixed,       // caller-supplied constant row, no gradient
  };
  Mode mode = kSoftAssign;
  std::vector<double> fixed;

  static MixtureSpec soft_assign() { return {kSoftAssign, {}}; }
  static MixtureSpec uniform() { return {kUniform, {}}; }
  static MixtureSpec fixed_row(std::vector<double> w) {
    return {kFixed, std::move(w)};
  }
  static MixtureSpec for_variant(Variant v);
  bool detached() const { return mode != kSoftAssign; }
};

// One scoring/training batch as flat index arrays.
struct BatchView {
  std::size_t n = 0;
  std::span<const int> user_features;  // n * n_user_features, row-major
  std::span<const int> item_ids;       // n
  std::span<const int> labels;         // n, may be empty when only scoring
};

// -- Clustering primitives ---------------------------------------------------

// Student-t kernel soft assignment: row i of the result is the probability
// of assigning representation i to each centroid. Rows are strictly positive
// and sum to 1. If `kernel_out` is given it receives the raw kernel values
// (needed by soft_assign_backward).
Tensor soft_assign(const Tensor& reps, const Tensor& centroids, double alpha,
                   Tensor* kernel_out = nullptr);

// Square-normalized pseudo-label rows; carries no gradient.
Tensor target_distribution(const Tensor& q);

// KL(P || Q'), with 0 log 0 == 0. Gradient flows into Q' only.
double clustering_loss(const Tensor& p, const Tensor& q, Tensor* dq = nullptr);

// Convex mixture of per-tower scores by one assignment row.
double aggregate(std::span<const double> tower_scores,
                 std::span<const double> weights);

// Mean binary cross-entropy over the batch with predictions clamped to
// [kProbClamp, 1 - kProbClamp]. Labels must be 0/1.
double classification_loss(std::span<const double> y_hat,
                           std::span<const int> labels,
                           std::vector<double>* dy_hat = nullptr);

inline double total_loss(double loss_p, double loss_c, double lambda) {
  return loss_p + lambda * loss_c;
}

struct ClusterGrads {
  Tensor d_reps;       // per-sample gradient, same shape as reps
  Tensor d_centroids;  // per-centroid gradient, same shape as centroids
};

// Analytic gradients of KL(P || Q') through the Student-t kernel with P held
// constant. Independent of soft_assign_backward; used as a cross-check.
ClusterGrads closed_form_cluster_gradients(const Tensor& reps,
                                           const Tensor& centroids,
                                           const Tensor& p, const Tensor& q,
                                           double alpha);

// Chain-rule backward of soft_assign: upstream dL/dQ' -> gradients for the
// representations and centroids. `kernel` and `q` are the forward outputs.
ClusterGrads soft_assign_backward(const Tensor& reps, const Tensor& centroids,
                                  const Tensor& kernel, const Tensor& q,
                                  const Tensor& dq, double alpha);

// -- The network --------------------------------------------------------------

struct BatchCache {
  std::size_t n = 0;
  Tensor x_u, x_i;         // concatenated embeddings per sample
  Tensor e_u, e_i;         // representations per sample
  Tensor mixture;          // n x K weights actually used in the aggregation
  Tensor kernel;           // n x K Student-t kernel (soft-assign mode only)
  Tensor tower_scores;     // n x K per-tower sigmoid outputs
  Tensor tower_logits;     // n x K pre-sigmoid tower outputs
  std::vector<double> y_hat;  // aggregated predictions, clamped
  std::vector<MlpCache> user_cache, item_cache;
  std::vector<std::vector<MlpCache>> tower_cache;  // [K][n]
  bool mixture_detached = false;
};

struct BatchLoss {
  double loss = 0.0;
  double loss_p = 0.0;
  double loss_c = 0.0;
};

struct RankedItem {
  int item = 0;
  double score = 0.0;
};

class BreakerNet {
 public:
  static constexpr const char* kCentroids = "centroids";

  explicit BreakerNet(ModelDims dims);

  const ModelDims& dims() const { return dims_; }
  std::size_t n_user_features() const { return dims_.user_cardinalities.size(); }

  // Fresh parameters drawn from the seeded generator in a fixed order:
  // user embedding tables, item embedding table, user stack, item stack,
  // towers 0..K-1, centroids (zeros; set by k-means before training).
  ParamSet init_params(std::uint64_t seed) const;

  // Expected parameter names/shapes; used to validate checkpoints.
  ParamSet zero_params() const;

  // Names of the user-side subset mirrored into the target network.
  const std::vector<std::string>& target_names() const { return target_names_; }
  ParamSet make_target(const ParamSet& params) const;
  // theta_minus = user-side subset of theta, bit-identical copy.
  void sync_target(const ParamSet& params, ParamSet& target) const;

  // User/item representation stacks. `features` is n * n_user_features ints.
  Tensor user_reps(const ParamSet& ps, std::span<const int> features,
                   std::size_t n, std::vector<MlpCache>* caches = nullptr,
                   Tensor* x_out = nullptr) const;
  Tensor item_reps(const ParamSet& ps, std::span<const int> item_ids,
                   std::size_t n, std::vector<MlpCache>* caches = nullptr,
                   Tensor* x_out = nullptr) const;

  BatchCache forward(const ParamSet& ps, const BatchView& batch,
                     const MixtureSpec& mix) const;

  // Loss and parameter gradients for one batch. `pseudo_labels` (P) adds the
  // clustering term weighted by `lambda`; pass nullptr to skip it. When
  // `dLdy_override` is non-empty it replaces the log-loss gradient with
  // respect to the aggregated prediction (test hook for gradient-path
  // analysis); the reported losses are unaffected.
  BatchLoss backward(const ParamSet& ps, const BatchView& batch,
                     const BatchCache& cache, const Tensor* pseudo_labels,
                     double lambda, GradMap& grads,
                     std::span<const double> dLdy_override = {}) const;

  // Scores every candidate and sorts by score descending, ties broken by
  // ascending item id. Throws on an unknown item id.
  std::vector<RankedItem> predict_rank(const ParamSet& ps,
                                       std::span<const int> user_features,
                                       std::span<const int> candidate_items,
                                       const MixtureSpec& mix) const;

  const Mlp& user_mlp() const { return user_mlp_; }
  const Mlp& item_mlp() const { return item_mlp_; }
  const Mlp& tower(std::size_t k) const { return towers_[k]; }

  std::string user_table_name(std::size_t feature) const;
  std::string item_table_name() const { return "emb.item"; }

 private:
  ModelDims dims_;
  Mlp user_mlp_, item_mlp_;
  std::vector<Mlp> towers_;
  std::vector<std::string> target_names_;
};

}  // namespace breaker
