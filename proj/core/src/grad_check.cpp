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

#include "breaker/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "breaker/error.hpp"
#include "breaker/rng.hpp"

namespace breaker {

double finite_diff_check(const std::function<double()>& loss, ParamSet& params,
                         const GradMap& analytic,
                         const FiniteDiffOptions& opt) {
  if (!(opt.eps > 0.0)) {
    throw ConfigError("finite_diff_check: eps must be > 0");
  }
  Rng rng(opt.seed);
  double max_rel = 0.0;
  for (auto& [name, w] : params) {
    const Tensor* g = analytic.find(name);
    std::vector<std::size_t> coords;
    if (opt.max_coords_per_param > 0 && w.size() > opt.max_coords_per_param) {
      coords = rng.sample_indices(w.size(), opt.max_coords_per_param);
      std::sort(coords.begin(), coords.end());
    } else {
      coords.resize(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) coords[i] = i;
    }
    for (std::size_t i : coords) {
      const double saved = w[i];
      w[i] = saved + opt.eps;
      const double up = loss();
      w[i] = saved - opt.eps;
      const double down = loss();
      w[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("finite_diff_check: non-finite loss at " + name);
      }
      const double numeric = (up - down) / (2.0 * opt.eps);
      const double a = g ? g->values[i] : 0.0;
      const double rel =
          std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace breaker
