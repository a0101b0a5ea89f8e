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

#include <span>
#include <string>
#include <vector>

#include "breaker/rng.hpp"
#include "breaker/tensor.hpp"

namespace breaker {

// Per-layer activations for one input vector, kept for the backward pass.
struct MlpCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> preact;  // affine output before activation
};

// A stack of affine layers with ReLU after every layer except the last,
// which stays linear. Parameters live in a ParamSet under
// "<prefix>.<layer>.W" / "<prefix>.<layer>.b". An empty width list is the
// identity map.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, std::size_t input_dim,
      std::vector<std::size_t> widths);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const {
    return widths_.empty() ? input_dim_ : widths_.back();
  }
  std::size_t layer_count() const { return widths_.size(); }
  const std::string& prefix() const { return prefix_; }
  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;

  // All layers: He-scaled normal, std sqrt(2 / fan_in); biases zero. Draw
  // order is layer-major, row-major.
  void init_params(ParamSet& ps, Rng& rng) const;

  std::vector<double> forward(const ParamSet& ps, std::span<const double> x,
                              MlpCache* cache = nullptr) const;

  // Accumulates parameter gradients into `grads` and returns the gradient
  // with respect to the input.
  std::vector<double> backward(const ParamSet& ps, const MlpCache& cache,
                               std::span<const double> grad_out,
                               GradMap& grads) const;

 private:
  std::string prefix_;
  std::size_t input_dim_ = 0;
  std::vector<std::size_t> widths_;
};

}  // namespace breaker
