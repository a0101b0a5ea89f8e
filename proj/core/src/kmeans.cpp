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

#include "breaker/kmeans.hpp"

#include <cmath>
#include <limits>

#include "breaker/error.hpp"
#include "breaker/rng.hpp"

namespace breaker {

namespace {

double dist2(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

namespace {

KMeansResult kmeans_single(const Tensor& points, std::size_t k, Rng& rng,
                           std::size_t max_iters, double tol) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  KMeansResult res;
  res.centroids = Tensor({k, d});

  // k-means++ seeding
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.uniform_index(n);
  std::copy(points.row(first).begin(), points.row(first).end(),
            res.centroids.row(0).begin());
  for (std::size_t j = 1; j < k; ++j) {
    double total = 0.0;
    const double* prev = res.centroids.values.data() + (j - 1) * d;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = dist2(points.values.data() + i * d, prev, d);
      if (d2 < min_d2[i]) min_d2[i] = d2;
      total += min_d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cum += min_d2[i];
        if (cum >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);  // all remaining points coincide
    }
    std::copy(points.row(pick).begin(), points.row(pick).end(),
              res.centroids.row(j).begin());
  }

  res.assignment.assign(n, 0);
  std::vector<std::size_t> counts(k, 0);
  Tensor sums({k, d});
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.values.begin(), sums.values.end(), 0.0);
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = points.values.data() + i * d;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double d2 = dist2(p, res.centroids.values.data() + j * d, d);
        if (d2 < best) {
          best = d2;
          best_j = j;
        }
      }
      res.assignment[i] = static_cast<int>(best_j);
      res.inertia += best;
      counts[best_j] += 1;
      double* s = sums.values.data() + best_j * d;
      for (std::size_t c = 0; c < d; ++c) s[c] += p[c];
    }
    // Reseed any emptied cluster to the point farthest from its assigned
    // centroid, then recompute means.
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      double worst = -1.0;
      std::size_t worst_i = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(res.assignment[i]);
        const double d2 = dist2(points.values.data() + i * d,
                                res.centroids.values.data() + a * d, d);
        if (d2 > worst) {
          worst = d2;
          worst_i = i;
        }
      }
      const auto old = static_cast<std::size_t>(res.assignment[worst_i]);
      const double* p = points.values.data() + worst_i * d;
      double* s_old = sums.values.data() + old * d;
      double* s_new = sums.values.data() + j * d;
      for (std::size_t c = 0; c < d; ++c) {
        s_old[c] -= p[c];
        s_new[c] += p[c];
      }
      counts[old] -= 1;
      counts[j] += 1;
      res.assignment[worst_i] = static_cast<int>(j);
    }
    double max_shift2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double* mu = res.centroids.values.data() + j * d;
      const double* s = sums.values.data() + j * d;
      const double inv = 1.0 / static_cast<double>(counts[j]);
      double shift2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double next = s[c] * inv;
        const double diff = next - mu[c];
        shift2 += diff * diff;
        mu[c] = next;
      }
      if (shift2 > max_shift2) max_shift2 = shift2;
    }
    if (std::sqrt(max_shift2) < tol) break;
  }

  // Final assignment/inertia against the converged centroids.
  res.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = points.values.data() + i * d;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d2 = dist2(p, res.centroids.values.data() + j * d, d);
      if (d2 < best) {
        best = d2;
        best_j = j;
      }
    }
    res.assignment[i] = static_cast<int>(best_j);
    res.inertia += best;
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters, double tol) {
  const std::size_t n = points.rows();
  if (k == 0) throw ConfigError("kmeans: k must be >= 1");
  if (n < k) {
    throw ConfigError("kmeans: " + std::to_string(n) + " points < k = " +
                      std::to_string(k));
  }
  // Best of several seeded runs by inertia; single-run k-means++ is too
  // sensitive to its first draws.
  constexpr std::size_t kRestarts = 16;
  Rng rng(seed);
  KMeansResult best;
  for (std::size_t r = 0; r < kRestarts; ++r) {
    KMeansResult cur = kmeans_single(points, k, rng, max_iters, tol);
    if (r == 0 || cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

}  // namespace breaker
