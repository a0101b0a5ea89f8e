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

#include "breaker/mlp.hpp"

#include <cmath>

#include "breaker/error.hpp"
#include "breaker/layers.hpp"

// Layers are initialized with He-scaled normals (std sqrt(2 / fan_in)),
// biases zero. Draws come from the caller's generator in layer order, so a
// fixed seed fixes every weight.

namespace breaker {

Mlp::Mlp(std::string prefix, std::size_t input_dim,
         std::vector<std::size_t> widths)
    : prefix_(std::move(prefix)),
      input_dim_(input_dim),
      widths_(std::move(widths)) {
  for (std::size_t w : widths_) {
    if (w == 0) throw ConfigError(prefix_ + ": zero layer width");
  }
}

std::string Mlp::weight_name(std::size_t layer) const {
  return prefix_ + "." + std::to_string(layer) + ".W";
}

std::string Mlp::bias_name(std::size_t layer) const {
  return prefix_ + "." + std::to_string(layer) + ".b";
}

void Mlp::init_params(ParamSet& ps, Rng& rng) const {
  std::size_t fan_in = input_dim_;
  for (std::size_t l = 0; l < widths_.size(); ++l) {
    const std::size_t out = widths_[l];
    // He-scaled normal on every layer. A near-zero output-layer init would
    // start all representations in a ball tiny compared to the Student-t
    // kernel's unit scale, leaving the soft assignments uniform and the
    // clustering head free to collapse before any structure forms.
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Tensor W({out, fan_in});
    for (double& w : W.values) w = rng.normal(0.0, stddev);
    ps.add(weight_name(l), std::move(W));
    ps.add(bias_name(l), Tensor({out}));
    fan_in = out;
  }
}

std::vector<double> Mlp::forward(const ParamSet& ps, std::span<const double> x,
                                 MlpCache* cache) const {
  if (x.size() != input_dim_) {
    throw ConfigError(prefix_ + ": input size " + std::to_string(x.size()) +
                      " != " + std::to_string(input_dim_));
  }
  std::vector<double> cur(x.begin(), x.end());
  if (cache) {
    cache->inputs.assign(widths_.size(), {});
    cache->preact.assign(widths_.size(), {});
  }
  for (std::size_t l = 0; l < widths_.size(); ++l) {
    const Tensor& W = ps.at(weight_name(l));
    const Tensor& b = ps.at(bias_name(l));
    std::vector<double> z(widths_[l]);
    detail::affine_kernel(W.values.data(), b.values.data(), cur.data(),
                          z.data(), W.rows(), W.cols());
    if (cache) {
      cache->inputs[l] = std::move(cur);
      cache->preact[l] = z;
    }
    const bool last = (l + 1 == widths_.size());
    if (!last) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    cur = std::move(z);
  }
  return cur;
}

std::vector<double> Mlp::backward(const ParamSet& ps, const MlpCache& cache,
                                  std::span<const double> grad_out,
                                  GradMap& grads) const {
  std::vector<double> g(grad_out.begin(), grad_out.end());
  for (std::size_t l = widths_.size(); l-- > 0;) {
    const bool last = (l + 1 == widths_.size());
    if (!last) {
      const std::vector<double>& z = cache.preact[l];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (z[i] <= 0.0) g[i] = 0.0;
      }
    }
    const Tensor& W = ps.at(weight_name(l));
    Tensor& dW = grads.slot(weight_name(l), W.shape);
    Tensor& db = grads.slot(bias_name(l), {W.rows()});
    std::vector<double> dx(W.cols());
    detail::affine_backward_kernel(W.values.data(), cache.inputs[l].data(),
                                   g.data(), dW.values.data(),
                                   db.values.data(), dx.data(), W.rows(),
                                   W.cols());
    g = std::move(dx);
  }
  return g;
}

}  // namespace breaker
