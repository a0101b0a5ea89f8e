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

#include <benchmark/benchmark.h>

#include "breaker/adam.hpp"
#include "breaker/data.hpp"
#include "breaker/layers.hpp"
#include "breaker/model.hpp"
#include "breaker/rng.hpp"

namespace {

using namespace breaker;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values) v = rng.normal();
  return t;
}

void BM_AffineForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor W = random_tensor({n, n}, rng);
  const Tensor b = random_tensor({n}, rng);
  const Tensor x = random_tensor({n}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affine_forward(x, W, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AffineForward)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_AffineBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor W = random_tensor({n, n}, rng);
  const Tensor x = random_tensor({n}, rng);
  const Tensor g = random_tensor({n}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affine_backward(x, W, g));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AffineBackward)->RangeMultiplier(2)->Range(16, 256)->Complexity();

void BM_SoftAssign(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor reps = random_tensor({n, 16}, rng);
  const Tensor mu = random_tensor({4, 16}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(soft_assign(reps, mu, 1.0));
  }
}
BENCHMARK(BM_SoftAssign)->Arg(256)->Arg(2048);

void BM_AdamStep(benchmark::State& state) {
  Rng rng(3);
  ParamSet ps;
  ps.add("w", random_tensor({1u << 16}, rng));
  GradMap grads;
  grads.accumulate("w", random_tensor({1u << 16}, rng));
  AdamState st;
  for (auto _ : state) {
    adam_step(ps, grads, st, 1e-3);
  }
}
BENCHMARK(BM_AdamStep);

void BM_TrainStepBatch(benchmark::State& state) {
  ModelDims dims;
  dims.user_cardinalities = {4, 4, 4, 4, 4};
  dims.n_items = 10;
  dims.embedding_dim = 8;
  dims.rem_widths = {32, 16};
  dims.tower_widths = {16, 8};
  dims.clusters = 4;
  const BreakerNet net(dims);
  ParamSet params = net.init_params(7);
  Rng rng(8);
  for (double& v : params.at(BreakerNet::kCentroids).values) v = rng.normal();

  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<int> feats, items, labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < 5; ++f) {
      feats.push_back(static_cast<int>(rng.uniform_index(4)));
    }
    items.push_back(static_cast<int>(rng.uniform_index(10)));
    labels.push_back(static_cast<int>(rng.uniform_index(2)));
  }
  const BatchView batch{n, feats, items, labels};
  AdamState st;
  for (auto _ : state) {
    const BatchCache cache =
        net.forward(params, batch, MixtureSpec::soft_assign());
    const Tensor pseudo = target_distribution(cache.mixture);
    GradMap grads;
    net.backward(params, batch, cache, &pseudo, 0.1, grads);
    adam_step(params, grads, st, 1e-3);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrainStepBatch)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
