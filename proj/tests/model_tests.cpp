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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "breaker/adam.hpp"
#include "breaker/error.hpp"
#include "breaker/layers.hpp"
#include "breaker/model.hpp"
#include "breaker/rng.hpp"

using namespace breaker;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng,
                     double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values) v = rng.normal(0.0, scale);
  return t;
}

Tensor random_stochastic_rows(std::size_t n, std::size_t k, Rng& rng) {
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

ModelDims small_dims() {
  ModelDims dims;
  dims.user_cardinalities = {3, 4};
  dims.n_items = 4;
  dims.embedding_dim = 3;
  dims.rem_widths = {5, 4};
  dims.tower_widths = {4};
  dims.clusters = 3;
  dims.alpha = 1.0;
  return dims;
}

struct SmallBatch {
  std::vector<int> feats, items, labels;
  std::size_t n = 0;
  BatchView view() const {
    return {n, {feats.data(), feats.size()}, {items.data(), items.size()},
            {labels.data(), labels.size()}};
  }
};

SmallBatch random_batch(const ModelDims& dims, std::size_t n,
                        std::uint64_t seed) {
  Rng rng(seed);
  SmallBatch b;
  b.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < dims.user_cardinalities.size(); ++f) {
      b.feats.push_back(
          static_cast<int>(rng.uniform_index(dims.user_cardinalities[f])));
    }
    b.items.push_back(static_cast<int>(rng.uniform_index(dims.n_items)));
    b.labels.push_back(static_cast<int>(rng.uniform_index(2)));
  }
  return b;
}

// Spreads embeddings/centroids so assignments and predictions vary.
ParamSet lively_params(const BreakerNet& net, std::uint64_t seed) {
  ParamSet params = net.init_params(seed);
  Rng rng(derive_seed(seed, 99));
  for (auto& [name, t] : params) {
    if (name.rfind("emb.", 0) == 0 || name == BreakerNet::kCentroids) {
      for (double& v : t.values) v = rng.normal(0.0, 0.5);
    }
  }
  return params;
}

}  // namespace

TEST_CASE("soft assignment is uniform for equidistant centroids") {
  const Tensor reps = Tensor::matrix(1, 2, {0.0, 0.0});
  const Tensor mu = Tensor::matrix(4, 2, {1, 0, -1, 0, 0, 1, 0, -1});
  const Tensor q = soft_assign(reps, mu, 1.0);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(q.at(0, j) == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("soft assignment hand case: similarities 1 and 1/4") {
  const Tensor reps = Tensor::matrix(1, 2, {0.0, 0.0});
  const Tensor mu = Tensor::matrix(2, 2, {0.0, 0.0, std::sqrt(3.0), 0.0});
  const Tensor q = soft_assign(reps, mu, 1.0);
  CHECK(q.at(0, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(q.at(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("soft assignment concentrates on a coincident centroid") {
  const Tensor reps = Tensor::matrix(1, 2, {2.0, 1.0});
  const Tensor mu = Tensor::matrix(2, 2, {2.0, 1.0, 1e6, 1.0});
  const Tensor q = soft_assign(reps, mu, 1.0);
  CHECK(q.at(0, 0) >= 1.0 - 1e-10);
}

TEST_CASE("assignment rows are strictly positive and sum to one") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Tensor reps = random_tensor({6, 4}, rng, 3.0);
    Tensor mu = random_tensor({5, 4}, rng, 3.0);
    const Tensor q = soft_assign(reps, mu, 1.0);
    const Tensor p = target_distribution(q);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      double sq = 0.0, sp = 0.0;
      for (std::size_t j = 0; j < q.cols(); ++j) {
        CHECK(q.at(i, j) > 0.0);
        CHECK(p.at(i, j) >= 0.0);
        sq += q.at(i, j);
        sp += p.at(i, j);
      }
      CHECK(sq == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(sp == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("target distribution of a single row is the row itself, exactly") {
  Rng rng(5);
  const Tensor reps = random_tensor({1, 3}, rng);
  const Tensor mu = random_tensor({4, 3}, rng);
  const Tensor q = soft_assign(reps, mu, 1.0);
  const Tensor p = target_distribution(q);
  CHECK(p.values == q.values);  // bitwise
}

TEST_CASE("target distribution hand case") {
  const Tensor q = Tensor::matrix(2, 2, {0.8, 0.2, 0.4, 0.6});
  const Tensor p = target_distribution(q);
  CHECK(p.at(0, 0) == doctest::Approx(32.0 / 35.0).epsilon(1e-12));
  CHECK(p.at(0, 1) == doctest::Approx(3.0 / 35.0).epsilon(1e-12));
  CHECK(p.at(1, 0) == doctest::Approx(8.0 / 35.0).epsilon(1e-12));
  CHECK(p.at(1, 1) == doctest::Approx(27.0 / 35.0).epsilon(1e-12));
}

TEST_CASE("target distribution keeps a uniform matrix uniform") {
  Tensor q({3, 4});
  std::fill(q.values.begin(), q.values.end(), 0.25);
  const Tensor p = target_distribution(q);
  for (double v : p.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("KL loss is zero at P = Q' and ln 2 on the hand case") {
  Rng rng(8);
  const Tensor q = random_stochastic_rows(5, 3, rng);
  CHECK(clustering_loss(q, q) == doctest::Approx(0.0).epsilon(1e-12));

  const Tensor p1 = Tensor::matrix(1, 2, {1.0, 0.0});
  const Tensor q1 = Tensor::matrix(1, 2, {0.5, 0.5});
  CHECK(clustering_loss(p1, q1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("KL loss is nonnegative on random stochastic pairs") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    const Tensor p = random_stochastic_rows(4, 3, rng);
    const Tensor q = random_stochastic_rows(4, 3, rng);
    CHECK(clustering_loss(p, q) >= -1e-12);
  }
}

TEST_CASE("KL gradient is -p/q") {
  const Tensor p = Tensor::matrix(1, 2, {0.7, 0.3});
  const Tensor q = Tensor::matrix(1, 2, {0.4, 0.6});
  Tensor dq;
  clustering_loss(p, q, &dq);
  CHECK(dq.at(0, 0) == doctest::Approx(-0.7 / 0.4).epsilon(1e-12));
  CHECK(dq.at(0, 1) == doctest::Approx(-0.3 / 0.6).epsilon(1e-12));
}

TEST_CASE("aggregate selects, mixes, and fixes equal towers") {
  const std::vector<double> scores{0.2, 0.6};
  CHECK(aggregate(scores, std::vector<double>{1.0, 0.0}) == 0.2);
  CHECK(aggregate(scores, std::vector<double>{0.0, 1.0}) == 0.6);
  CHECK(aggregate(scores, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(0.4).epsilon(1e-12));
  Rng rng(4);
  const Tensor w = random_stochastic_rows(1, 5, rng);
  const std::vector<double> equal(5, 0.37);
  CHECK(aggregate(equal, w.row(0)) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK_THROWS_AS(aggregate(scores, std::vector<double>{1.0}), ConfigError);
}

TEST_CASE("zero towers score one half; copied towers agree") {
  ModelDims dims = small_dims();
  const BreakerNet net(dims);
  ParamSet params = net.init_params(1);
  for (auto& [name, t] : params) {
    if (name.rfind("tower.", 0) == 0) {
      std::fill(t.values.begin(), t.values.end(), 0.0);
    }
  }
  const SmallBatch b = random_batch(dims, 4, 2);
  const BatchCache cache = net.forward(params, b.view(), MixtureSpec::uniform());
  for (double v : cache.tower_scores.values) CHECK(v == 0.5);
  for (double v : cache.y_hat) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

  // copy tower 0 into all towers -> identical per-tower scores
  ParamSet copied = net.init_params(1);
  for (std::size_t k = 1; k < dims.clusters; ++k) {
    for (std::size_t l = 0; l < net.tower(k).layer_count(); ++l) {
      copied.at(net.tower(k).weight_name(l)).values =
          copied.at(net.tower(0).weight_name(l)).values;
      copied.at(net.tower(k).bias_name(l)).values =
          copied.at(net.tower(0).bias_name(l)).values;
    }
  }
  const BatchCache c2 = net.forward(copied, b.view(), MixtureSpec::uniform());
  for (std::size_t i = 0; i < c2.n; ++i) {
    for (std::size_t k = 1; k < dims.clusters; ++k) {
      CHECK(c2.tower_scores.at(i, k) == c2.tower_scores.at(i, 0));
    }
  }
}

TEST_CASE("a single-cluster model reduces to one pointwise head") {
  ModelDims dims = small_dims();
  dims.clusters = 1;
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 3);
  const SmallBatch b = random_batch(dims, 6, 4);
  const BatchCache cache =
      net.forward(params, b.view(), MixtureSpec::soft_assign());
  for (std::size_t i = 0; i < cache.n; ++i) {
    CHECK(cache.mixture.at(i, 0) == 1.0);
    CHECK(cache.y_hat[i] == doctest::Approx(cache.tower_scores.at(i, 0))
                                .epsilon(1e-12));
  }
}

TEST_CASE("mixture equation consistency by direct recomputation") {
  ModelDims dims = small_dims();
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 11);
  const SmallBatch b = random_batch(dims, 8, 12);
  const BatchCache cache =
      net.forward(params, b.view(), MixtureSpec::soft_assign());
  for (std::size_t i = 0; i < cache.n; ++i) {
    double mix = 0.0;
    for (std::size_t k = 0; k < dims.clusters; ++k) {
      mix += cache.tower_scores.at(i, k) * cache.mixture.at(i, k);
    }
    CHECK(std::abs(mix - cache.y_hat[i]) <= 1e-12);
  }
}

TEST_CASE("classification loss values and label validation") {
  {
    const std::vector<double> y_hat{1.0};
    const std::vector<int> y{1};
    CHECK(classification_loss(y_hat, y) ==
          doctest::Approx(-std::log(1.0 - kProbClamp)).epsilon(1e-9));
    CHECK(classification_loss(y_hat, y) < 2e-7);
  }
  {
    const std::vector<double> y_hat{0.5};
    const std::vector<int> y{1};
    CHECK(classification_loss(y_hat, y) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  {
    const std::vector<double> y_hat{0.5, 0.5};
    const std::vector<int> y{1, 0};
    CHECK(classification_loss(y_hat, y) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  {
    const std::vector<double> y_hat{0.5};
    const std::vector<int> y{2};
    CHECK_THROWS_AS(classification_loss(y_hat, y), ConfigError);
  }
}

TEST_CASE("total loss composition") {
  CHECK(total_loss(0.7, 0.3, 0.1) == doctest::Approx(0.73).epsilon(1e-12));
  CHECK(total_loss(0.9, 123.0, 0.0) == 0.9);
  CHECK(total_loss(0.9, 0.0, 1.0) == 0.9);
}

TEST_CASE("closed-form clustering gradients vanish at P = Q'") {
  Rng rng(21);
  const Tensor reps = random_tensor({5, 3}, rng);
  const Tensor mu = random_tensor({3, 3}, rng);
  const Tensor q = soft_assign(reps, mu, 1.0);
  const ClusterGrads g = closed_form_cluster_gradients(reps, mu, q, q, 1.0);
  for (double v : g.d_reps.values) CHECK(std::abs(v) <= 1e-12);
  for (double v : g.d_centroids.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("closed-form gradient is zero for a coincident single centroid") {
  const Tensor reps = Tensor::matrix(1, 2, {1.5, -2.0});
  const Tensor mu = Tensor::matrix(1, 2, {1.5, -2.0});
  const Tensor q = soft_assign(reps, mu, 1.0);
  CHECK(q.at(0, 0) == 1.0);
  const Tensor p = target_distribution(q);
  const ClusterGrads g = closed_form_cluster_gradients(reps, mu, p, q, 1.0);
  for (double v : g.d_reps.values) CHECK(v == 0.0);
  for (double v : g.d_centroids.values) CHECK(v == 0.0);
}

TEST_CASE("closed-form gradients match finite differences of the KL loss") {
  Rng rng(31);
  Tensor reps = random_tensor({4, 3}, rng);
  Tensor mu = random_tensor({2, 3}, rng);
  const Tensor p = random_stochastic_rows(4, 2, rng);
  const Tensor q0 = soft_assign(reps, mu, 1.0);
  const ClusterGrads analytic =
      closed_form_cluster_gradients(reps, mu, p, q0, 1.0);
  const double eps = 1e-6;
  const auto kl = [&] { return clustering_loss(p, soft_assign(reps, mu, 1.0)); };
  for (Tensor* t : {&reps, &mu}) {
    const Tensor& a = t == &reps ? analytic.d_reps : analytic.d_centroids;
    for (std::size_t i = 0; i < t->size(); ++i) {
      const double saved = (*t)[i];
      (*t)[i] = saved + eps;
      const double up = kl();
      (*t)[i] = saved - eps;
      const double down = kl();
      (*t)[i] = saved;
      CHECK(std::abs(a[i] - (up - down) / (2.0 * eps)) <= 1e-6);
    }
  }
}

TEST_CASE("network clustering backward agrees with the closed form") {
  for (std::uint64_t seed : {41ULL, 42ULL, 43ULL, 44ULL}) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.uniform_index(15);
    const std::size_t k = 2 + rng.uniform_index(3);
    const std::size_t d = 2 + rng.uniform_index(7);
    const Tensor reps = random_tensor({n, d}, rng);
    const Tensor mu = random_tensor({k, d}, rng);
    const Tensor p = random_stochastic_rows(n, k, rng);
    Tensor kernel;
    const Tensor q = soft_assign(reps, mu, 1.0, &kernel);
    Tensor dq;
    clustering_loss(p, q, &dq);
    const ClusterGrads engine =
        soft_assign_backward(reps, mu, kernel, q, dq, 1.0);
    const ClusterGrads formula =
        closed_form_cluster_gradients(reps, mu, p, q, 1.0);
    for (std::size_t i = 0; i < engine.d_reps.size(); ++i) {
      CHECK(std::abs(engine.d_reps[i] - formula.d_reps[i]) <= 1e-8);
    }
    for (std::size_t i = 0; i < engine.d_centroids.size(); ++i) {
      CHECK(std::abs(engine.d_centroids[i] - formula.d_centroids[i]) <= 1e-8);
    }
  }
}

TEST_CASE("zero representation stacks produce zero representations") {
  ModelDims dims = small_dims();
  const BreakerNet net(dims);
  ParamSet params = net.init_params(5);
  for (auto& [name, t] : params) {
    if (name.rfind("rem.user.", 0) == 0) {
      std::fill(t.values.begin(), t.values.end(), 0.0);
    }
  }
  const SmallBatch b = random_batch(dims, 3, 6);
  const Tensor reps = net.user_reps(params, b.feats, b.n);
  for (double v : reps.values) CHECK(v == 0.0);
}

TEST_CASE("identity representation stack passes the embedding through") {
  ModelDims dims;
  dims.user_cardinalities = {3};
  dims.n_items = 2;
  dims.embedding_dim = 2;
  dims.rem_widths = {2};
  dims.tower_widths = {};
  dims.clusters = 2;
  const BreakerNet net(dims);
  ParamSet params = net.init_params(0);
  params.at("emb.user.0").values = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  params.at("rem.user.0.W").values = {1.0, 0.0, 0.0, 1.0};
  params.at("rem.user.0.b").values = {0.0, 0.0};
  const std::vector<int> feats{1};
  const Tensor reps = net.user_reps(params, feats, 1);
  CHECK(reps.values == std::vector<double>{3.0, 4.0});
}

TEST_CASE("fixed seed and config give bit-identical representations") {
  const ModelDims dims = small_dims();
  const BreakerNet a(dims), b(dims);
  const ParamSet pa = a.init_params(77), pb = b.init_params(77);
  const SmallBatch batch = random_batch(dims, 5, 7);
  const Tensor ra = a.user_reps(pa, batch.feats, batch.n);
  const Tensor rb = b.user_reps(pb, batch.feats, batch.n);
  CHECK(ra.values == rb.values);
}

TEST_CASE("target sync copies the user side bit-exactly and goes stale") {
  const ModelDims dims = small_dims();
  const BreakerNet net(dims);
  ParamSet params = net.init_params(9);
  ParamSet target = net.make_target(params);
  for (const std::string& name : net.target_names()) {
    CHECK(target.at(name).values == params.at(name).values);
  }
  CHECK_FALSE(target.has(BreakerNet::kCentroids));
  CHECK_FALSE(target.has("emb.item"));

  // one optimizer step on the main network leaves the target unchanged
  GradMap grads;
  const std::string w0 = net.user_mlp().weight_name(0);
  Tensor g(params.at(w0).shape);
  std::fill(g.values.begin(), g.values.end(), 1.0);
  grads.accumulate(w0, g);
  AdamState st;
  const std::vector<double> before_target = target.at(w0).values;
  adam_step(params, grads, st, 1e-2);
  CHECK(target.at(w0).values == before_target);
  CHECK(params.at(w0).values != before_target);

  net.sync_target(params, target);
  CHECK(target.at(w0).values == params.at(w0).values);
}

TEST_CASE("prediction ranks by score with ascending-id ties") {
  const ModelDims dims = small_dims();
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 15);
  const std::vector<int> feats{1, 2};

  std::vector<int> all_items{0, 1, 2, 3};
  const auto ranked =
      net.predict_rank(params, feats, all_items, MixtureSpec::soft_assign());
  REQUIRE(ranked.size() == 4);
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    const bool ordered = ranked[i - 1].score > ranked[i].score ||
                         (ranked[i - 1].score == ranked[i].score &&
                          ranked[i - 1].item < ranked[i].item);
    CHECK(ordered);
  }

  const std::vector<int> one{2};
  CHECK(net.predict_rank(params, feats, one, MixtureSpec::soft_assign())[0]
            .item == 2);

  // identical item embeddings -> identical scores -> ascending ids
  ParamSet tied = lively_params(net, 15);
  Tensor& itab = tied.at("emb.item");
  for (std::size_t r = 1; r < itab.rows(); ++r) {
    std::copy(itab.row(0).begin(), itab.row(0).end(), itab.row(r).begin());
  }
  const auto tied_rank =
      net.predict_rank(tied, feats, all_items, MixtureSpec::soft_assign());
  for (std::size_t i = 0; i < tied_rank.size(); ++i) {
    CHECK(tied_rank[i].item == static_cast<int>(i));
  }

  const std::vector<int> bad{0, 9};
  CHECK_THROWS_AS(
      net.predict_rank(params, feats, bad, MixtureSpec::soft_assign()),
      std::out_of_range);
  const std::vector<int> none;
  CHECK_THROWS_AS(
      net.predict_rank(params, feats, none, MixtureSpec::soft_assign()),
      ConfigError);
}

TEST_CASE("one-hot frozen mixture trains only the matching tower") {
  const ModelDims dims = small_dims();
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 23);
  const SmallBatch b = random_batch(dims, 6, 24);
  const std::size_t chosen = 1;
  std::vector<double> onehot(dims.clusters, 0.0);
  onehot[chosen] = 1.0;
  const BatchCache cache =
      net.forward(params, b.view(), MixtureSpec::fixed_row(onehot));
  GradMap grads;
  net.backward(params, b.view(), cache, nullptr, 0.0, grads);
  for (std::size_t k = 0; k < dims.clusters; ++k) {
    const Tensor* gw = grads.find(net.tower(k).weight_name(0));
    if (k == chosen) {
      REQUIRE(gw != nullptr);
      double norm = 0.0;
      for (double v : gw->values) norm += v * v;
      CHECK(norm > 0.0);
    } else if (gw != nullptr) {
      for (double v : gw->values) CHECK(v == 0.0);
    }
  }
  // no clustering signal: centroids receive no gradient
  CHECK(grads.find(BreakerNet::kCentroids) == nullptr);
}

TEST_CASE("constant mixture weights scale per-tower gradient norms") {
  const ModelDims dims = small_dims();
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 33);
  const SmallBatch b = random_batch(dims, 7, 34);
  const std::vector<double> weights{0.3, 0.5, 0.2};

  const BatchCache cache =
      net.forward(params, b.view(), MixtureSpec::fixed_row(weights));
  std::vector<double> dy;
  classification_loss(cache.y_hat, b.view().labels, &dy);
  GradMap full;
  net.backward(params, b.view(), cache, nullptr, 0.0, full);

  for (std::size_t k = 0; k < dims.clusters; ++k) {
    // Same log-loss gradient, but routed through tower k alone.
    std::vector<double> onehot(dims.clusters, 0.0);
    onehot[k] = 1.0;
    const BatchCache onehot_cache =
        net.forward(params, b.view(), MixtureSpec::fixed_row(onehot));
    GradMap solo;
    net.backward(params, b.view(), onehot_cache, nullptr, 0.0, solo, dy);
    for (std::size_t l = 0; l < net.tower(k).layer_count(); ++l) {
      for (const std::string& name :
           {net.tower(k).weight_name(l), net.tower(k).bias_name(l)}) {
        const Tensor* gf = full.find(name);
        const Tensor* gs = solo.find(name);
        REQUIRE(gf != nullptr);
        REQUIRE(gs != nullptr);
        double nf = 0.0, ns = 0.0;
        for (double v : gf->values) nf += v * v;
        for (double v : gs->values) ns += v * v;
        CHECK(std::abs(std::sqrt(nf) - weights[k] * std::sqrt(ns)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("pseudo-labels demand the soft-assign mixture") {
  const ModelDims dims = small_dims();
  const BreakerNet net(dims);
  const ParamSet params = lively_params(net, 51);
  const SmallBatch b = random_batch(dims, 3, 52);
  const BatchCache cache = net.forward(params, b.view(), MixtureSpec::uniform());
  Tensor pseudo({3, dims.clusters});
  GradMap grads;
  CHECK_THROWS_AS(net.backward(params, b.view(), cache, &pseudo, 0.1, grads),
                  ConfigError);
}
