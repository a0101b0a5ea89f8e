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

#include <functional>

#include "breaker/tensor.hpp"

namespace breaker {

struct FiniteDiffOptions {
  double eps = 1e-5;
  // 0 checks every coordinate; otherwise at most this many coordinates per
  // parameter, chosen by a seeded subsample.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 0;
};

// Central-difference check of `analytic` against `loss`, which must be a
// deterministic function of `params` (perturbed in place and restored).
// Returns max over checked coordinates of |analytic - numeric| / max(1,
// |numeric|). A parameter missing from `analytic` is treated as zero
// gradient. Throws NumericError on a non-finite loss.
double finite_diff_check(const std::function<double()>& loss, ParamSet& params,
                         const GradMap& analytic,
                         const FiniteDiffOptions& opt = {});

}  // namespace breaker
