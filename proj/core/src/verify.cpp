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

#include "breaker/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "breaker/grad_check.hpp"
#include "breaker/layers.hpp"
#include "breaker/model.hpp"
#include "breaker/rng.hpp"

namespace breaker {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                     double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values) v = rng.normal(0.0, scale);
  return t;
}

// Row-stochastic strictly positive matrix.
Tensor random_rows(std::size_t n, std::size_t k, Rng& rng) {
  Tensor t({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      t.at(i, j) = rng.uniform() + 0.05;
      sum += t.at(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) t.at(i, j) /= sum;
  }
  return t;
}

double check_affine(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t m = 3 + rng.uniform_index(4);
  const std::size_t n = 2 + rng.uniform_index(4);
  ParamSet ps;
  ps.add("x", random_tensor({n}, rng));
  ps.add("W", random_tensor({m, n}, rng));
  ps.add("b", random_tensor({m}, rng));
  const Tensor proj = random_tensor({m}, rng);
  const auto loss = [&] {
    const Tensor y = affine_forward(ps.at("x"), ps.at("W"), ps.at("b"));
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += proj[i] * y[i];
    return acc;
  };
  const AffineGrads g = affine_backward(ps.at("x"), ps.at("W"), proj);
  GradMap analytic;
  analytic.accumulate("x", g.dx);
  analytic.accumulate("W", g.dW);
  analytic.accumulate("b", g.db);
  return finite_diff_check(loss, ps, analytic, {1e-5, 0, seed});
}

double check_elementwise(std::uint64_t seed, bool use_relu) {
  Rng rng(seed);
  const std::size_t n = 4 + rng.uniform_index(5);
  ParamSet ps;
  Tensor x = random_tensor({n}, rng);
  if (use_relu) {
    // keep the check point away from the kink at zero
    for (double& v : x.values) {
      while (std::abs(v) < 1e-4) v = rng.normal();
    }
  }
  ps.add("x", std::move(x));
  const Tensor proj = random_tensor({n}, rng);
  const auto loss = [&] {
    const Tensor y = use_relu ? relu(ps.at("x")) : sigmoid(ps.at("x"));
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += proj[i] * y[i];
    return acc;
  };
  const Tensor g = use_relu ? relu_backward(ps.at("x"), proj)
                            : sigmoid_backward(ps.at("x"), proj);
  GradMap analytic;
  analytic.accumulate("x", g);
  return finite_diff_check(loss, ps, analytic, {1e-5, 0, seed});
}

double check_embedding(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t v = 4 + rng.uniform_index(4);
  const std::size_t d = 2 + rng.uniform_index(3);
  ParamSet ps;
  ps.add("table", random_tensor({v, d}, rng));
  std::vector<int> indices;
  for (int p = 0; p < 4; ++p) {
    indices.push_back(static_cast<int>(rng.uniform_index(v)));
  }
  indices.push_back(indices.front());  // exercise repeated-index accumulation
  const Tensor proj = random_tensor({indices.size() * d}, rng);
  const auto loss = [&] {
    const Tensor y = embedding_lookup(ps.at("table"), indices);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += proj[i] * y[i];
    return acc;
  };
  GradMap analytic;
  Tensor& gt = analytic.slot("table", {v, d});
  embedding_lookup_backward(indices, proj, gt);
  return finite_diff_check(loss, ps, analytic, {1e-5, 0, seed});
}

struct ClusterCase {
  Tensor reps, centroids, pseudo;
};

ClusterCase random_cluster_case(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = 2 + rng.uniform_index(15);  // <= 16
  const std::size_t k = 2 + rng.uniform_index(3);   // <= 4
  const std::size_t d = 2 + rng.uniform_index(7);   // <= 8
  ClusterCase c;
  c.reps = random_tensor({n, d}, rng);
  c.centroids = random_tensor({k, d}, rng);
  c.pseudo = random_rows(n, k, rng);
  return c;
}

// Network-path gradients of KL(P||Q') via the generic soft-assign backward.
ClusterGrads engine_cluster_grads(const ClusterCase& c, double alpha) {
  Tensor kernel;
  const Tensor q = soft_assign(c.reps, c.centroids, alpha, &kernel);
  Tensor dq;
  clustering_loss(c.pseudo, q, &dq);
  return soft_assign_backward(c.reps, c.centroids, kernel, q, dq, alpha);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

// Absolute error of the closed-form clustering gradients against central
// finite differences of KL(P||Q') with P constant.
double cluster_fd_error(const ClusterCase& base, double alpha, double eps) {
  ClusterCase c = base;
  const auto kl = [&] {
    const Tensor q = soft_assign(c.reps, c.centroids, alpha);
    return clustering_loss(c.pseudo, q);
  };
  const Tensor q0 = soft_assign(c.reps, c.centroids, alpha);
  const ClusterGrads analytic =
      closed_form_cluster_gradients(c.reps, c.centroids, c.pseudo, q0, alpha);
  double worst = 0.0;
  for (Tensor* t : {&c.reps, &c.centroids}) {
    const Tensor& a =
        t == &c.reps ? analytic.d_reps : analytic.d_centroids;
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = (*t)[i];
      (*t)[i] = saved + eps;
      const double up = kl();
      (*t)[i] = saved - eps;
      const double down = kl();
      (*t)[i] = saved;
      worst = std::max(worst, std::abs(a[i] - (up - down) / (2.0 * eps)));
    }
  }
  return worst;
}

// Smallest |preactivation| across all hidden (rectified) layers; central
// differences are only valid away from the rectifier kink.
double min_hidden_preact(const BreakerNet& net, const BatchCache& cache) {
  double m = std::numeric_limits<double>::infinity();
  const auto scan = [&m](const std::vector<MlpCache>& caches, const Mlp& mlp) {
    for (const MlpCache& c : caches) {
      for (std::size_t l = 0; l + 1 < mlp.layer_count(); ++l) {
        for (double z : c.preact[l]) m = std::min(m, std::abs(z));
      }
    }
  };
  scan(cache.user_cache, net.user_mlp());
  scan(cache.item_cache, net.item_mlp());
  for (std::size_t k = 0; k < net.dims().clusters; ++k) {
    scan(cache.tower_cache[k], net.tower(k));
  }
  return m;
}

// Small full network whose total loss is checked coordinate-wise. Instances
// whose forward pass grazes a rectifier kink are redrawn so the check point
// is differentiable.
double end_to_end_error(std::uint64_t seed) {
  ModelDims dims;
  dims.user_cardinalities = {3, 4};
  dims.n_items = 4;
  dims.embedding_dim = 3;
  dims.rem_widths = {5, 4};
  dims.tower_widths = {4};
  dims.clusters = 3;
  dims.alpha = 1.0;
  const BreakerNet net(dims);
  const double lambda = 0.3;
  const std::size_t n = 6;

  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s = derive_seed(seed, 7000 + attempt);
    Rng rng(s);
    ParamSet params = net.init_params(s);
    // Spread the embeddings and centroids so the assignment is non-trivial.
    for (auto& [name, t] : params) {
      if (name.rfind("emb.", 0) == 0 || name == BreakerNet::kCentroids) {
        for (double& v : t.values) v = rng.normal(0.0, 0.5);
      }
    }
    std::vector<int> feats, items, labels;
    for (std::size_t i = 0; i < n; ++i) {
      feats.push_back(static_cast<int>(rng.uniform_index(3)));
      feats.push_back(static_cast<int>(rng.uniform_index(4)));
      items.push_back(static_cast<int>(rng.uniform_index(4)));
      labels.push_back(static_cast<int>(rng.uniform_index(2)));
    }
    const BatchView batch{n, feats, items, labels};

    const BatchCache probe =
        net.forward(params, batch, MixtureSpec::soft_assign());
    if (min_hidden_preact(net, probe) < 1e-4 && attempt < 32) continue;

    // Pseudo-labels from a frozen target snapshot; they stay constant while
    // the parameters are perturbed.
    const ParamSet target = net.make_target(params);
    const Tensor target_reps = net.user_reps(target, feats, n);
    const Tensor q_target = soft_assign(
        target_reps, params.at(BreakerNet::kCentroids), dims.alpha);
    const Tensor pseudo = target_distribution(q_target);

    const auto loss = [&] {
      const BatchCache cache =
          net.forward(params, batch, MixtureSpec::soft_assign());
      const double lp = classification_loss(cache.y_hat, batch.labels);
      const double lc = clustering_loss(pseudo, cache.mixture);
      return total_loss(lp, lc, lambda);
    };
    GradMap grads;
    net.backward(params, batch, probe, &pseudo, lambda, grads);
    FiniteDiffOptions opt;
    opt.eps = 1e-5;
    opt.max_coords_per_param = 24;
    opt.seed = s;
    return finite_diff_check(loss, params, grads, opt);
  }
}

}  // namespace

GradientSuite run_gradient_suite(std::uint64_t seed, InjectFault fault) {
  GradientSuite suite;
  const auto add = [&suite](std::string group, double err, double tol,
                            bool relative) {
    const bool pass = err <= tol;
    suite.checks.push_back({std::move(group), err, tol, relative, pass});
    suite.all_pass = suite.all_pass && pass;
  };

  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    worst = std::max(worst, check_affine(derive_seed(seed, 100 + p)));
  }
  add("engine.affine", worst, 1e-4, true);

  worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    worst = std::max(worst, check_elementwise(derive_seed(seed, 200 + p), true));
  }
  add("engine.relu", worst, 1e-4, true);

  worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    worst = std::max(worst, check_elementwise(derive_seed(seed, 300 + p), false));
  }
  add("engine.sigmoid", worst, 1e-4, true);

  worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    worst = std::max(worst, check_embedding(derive_seed(seed, 400 + p)));
  }
  add("engine.embedding", worst, 1e-4, true);

  const double alpha = 1.0;
  double worst_reps = 0.0, worst_centroids = 0.0, worst_fd = 0.0;
  for (int p = 0; p < 8; ++p) {
    const ClusterCase c = random_cluster_case(derive_seed(seed, 500 + p));
    const Tensor q0 = soft_assign(c.reps, c.centroids, alpha);
    const ClusterGrads formula =
        closed_form_cluster_gradients(c.reps, c.centroids, c.pseudo, q0, alpha);
    ClusterGrads engine = engine_cluster_grads(c, alpha);
    if (fault == InjectFault::kClusterGradSign) {
      for (double& v : engine.d_centroids.values) v = -v;
    }
    worst_reps = std::max(worst_reps,
                          max_abs_diff(engine.d_reps, formula.d_reps));
    worst_centroids = std::max(
        worst_centroids, max_abs_diff(engine.d_centroids, formula.d_centroids));
    worst_fd = std::max(worst_fd, cluster_fd_error(c, alpha, 1e-6));
  }
  add("clustering.representations", worst_reps, 1e-8, false);
  add("clustering.centroids", worst_centroids, 1e-8, false);
  add("clustering.finite_diff", worst_fd, 1e-6, false);

  worst = 0.0;
  for (int p = 0; p < 3; ++p) {
    worst = std::max(worst, end_to_end_error(derive_seed(seed, 600 + p)));
  }
  add("end_to_end.total_loss", worst, 1e-4, true);

  return suite;
}

}  // namespace breaker
