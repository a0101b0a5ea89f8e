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

#include <cstdint>
#include <map>

#include "breaker/tensor.hpp"

namespace breaker {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::map<std::string, Tensor> m;  // first moments, keyed like the params
  std::map<std::string, Tensor> v;  // second moments
};

// One Adam step with bias correction. Parameters absent from `grads` are
// untouched (their moments included). Throws NumericError naming the
// parameter on a non-finite gradient.
void adam_step(ParamSet& params, const GradMap& grads, AdamState& state,
               double lr);

}  // namespace breaker
