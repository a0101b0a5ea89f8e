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
#include <vector>

#include "breaker/tensor.hpp"

namespace breaker {

struct KMeansResult {
  Tensor centroids;             // k x d
  std::vector<int> assignment;  // per point
  std::size_t iterations = 0;
  double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding. Stops after `max_iters` or when
// the largest centroid shift falls below `tol`. An emptied cluster is
// reseeded to the point farthest from its assigned centroid. Deterministic
// under `seed`. Throws ConfigError when points.rows() < k.
KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100, double tol = 1e-4);

inline Tensor kmeans_init(const Tensor& points, std::size_t k,
                          std::uint64_t seed) {
  return kmeans(points, k, seed).centroids;
}

}  // namespace breaker
