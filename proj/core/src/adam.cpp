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

#include "breaker/adam.hpp"

#include <cmath>

#include "breaker/error.hpp"

namespace breaker {

void adam_step(ParamSet& params, const GradMap& grads, AdamState& state,
               double lr) {
  if (!(lr > 0.0)) {
    throw ConfigError("adam_step: learning rate must be > 0");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (auto& [name, w] : params) {
    const Tensor* g = grads.find(name);
    if (!g) continue;
    if (g->shape != w.shape) {
      throw ConfigError("adam_step: gradient shape " + shape_str(g->shape) +
                        " != parameter shape " + shape_str(w.shape) + " for " +
                        name);
    }
    if (!g->all_finite()) {
      throw NumericError("adam_step: non-finite gradient for " + name);
    }
    auto mit = state.m.find(name);
    if (mit == state.m.end()) {
      mit = state.m.emplace(name, Tensor(w.shape)).first;
      state.v.emplace(name, Tensor(w.shape));
    }
    Tensor& m = mit->second;
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g->values[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace breaker
