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

#include "breaker/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "breaker/error.hpp"
#include "breaker/rng.hpp"

namespace breaker {

int policy_choice(const Tensor& scores, std::size_t user_row) {
  const std::size_t items = scores.cols();
  std::size_t best = 0;
  double best_score = scores.at(user_row, 0);
  for (std::size_t i = 1; i < items; ++i) {
    if (scores.at(user_row, i) > best_score) {
      best_score = scores.at(user_row, i);
      best = i;
    }
  }
  return static_cast<int>(best);
}

double recall_at_1(const Tensor& scores,
                   std::span<const LoggedRecord> records) {
  std::size_t positives = 0, hits = 0;
  for (const LoggedRecord& r : records) {
    if (r.label != 1) continue;
    ++positives;
    if (policy_choice(scores, static_cast<std::size_t>(r.user_row)) == r.item) {
      ++hits;
    }
  }
  if (positives == 0) {
    throw ConfigError("recall_at_1 is undefined without positive records");
  }
  return static_cast<double>(hits) / static_cast<double>(positives);
}

double average_expected_response(const Tensor& scores,
                                 std::span<const LoggedRecord> records) {
  if (records.empty()) {
    throw ConfigError("average_expected_response needs at least one record");
  }
  double sum = 0.0;
  for (const LoggedRecord& r : records) {
    if (policy_choice(scores, static_cast<std::size_t>(r.user_row)) == r.item) {
      sum += static_cast<double>(r.label);
    }
  }
  return sum / static_cast<double>(records.size());
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ConfigError("auc: " + std::to_string(scores.size()) +
                      " scores vs " + std::to_string(labels.size()) +
                      " labels");
  }
  std::size_t pos = 0;
  for (int y : labels) pos += y != 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw ConfigError("auc needs at least one positive and one negative");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Average ranks over ties, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] != 0) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(neg));
}

ItemAuc item_based_auc(std::span<const LoggedRecord> records,
                       std::span<const double> scores) {
  if (records.size() != scores.size()) {
    throw ConfigError("item_based_auc: record/score count mismatch");
  }
  std::map<int, std::pair<std::vector<double>, std::vector<int>>> by_item;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& [s, y] = by_item[records[i].item];
    s.push_back(scores[i]);
    y.push_back(records[i].label);
  }
  ItemAuc out;
  double sum = 0.0;
  for (const auto& [item, sy] : by_item) {
    const auto& [s, y] = sy;
    const auto pos = static_cast<std::size_t>(
        std::count_if(y.begin(), y.end(), [](int v) { return v != 0; }));
    if (pos == 0 || pos == y.size()) {
      out.skipped.push_back(item);
      continue;
    }
    const double a = auc(s, y);
    out.per_item[item] = a;
    sum += a;
  }
  if (out.per_item.empty()) {
    throw ConfigError("item_based_auc: no item has both classes");
  }
  out.macro = sum / static_cast<double>(out.per_item.size());
  return out;
}

double silhouette(const Tensor& reps, std::span<const int> labels,
                  std::size_t sample_cap, std::uint64_t seed) {
  const std::size_t n = reps.rows();
  const std::size_t d = reps.cols();
  if (labels.size() != n) {
    throw ConfigError("silhouette: " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(n) + " points");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (sample_cap > 0 && n > sample_cap) {
    Rng rng(seed);
    idx = rng.sample_indices(n, sample_cap);
    std::sort(idx.begin(), idx.end());
  }
  const std::size_t s = idx.size();

  std::unordered_map<int, std::size_t> cluster_index;
  std::vector<std::size_t> cluster_sizes;
  std::vector<std::size_t> point_cluster(s);
  for (std::size_t i = 0; i < s; ++i) {
    const int lab = labels[idx[i]];
    auto it = cluster_index.find(lab);
    if (it == cluster_index.end()) {
      it = cluster_index.emplace(lab, cluster_sizes.size()).first;
      cluster_sizes.push_back(0);
    }
    point_cluster[i] = it->second;
    cluster_sizes[it->second] += 1;
  }
  const std::size_t k = cluster_sizes.size();
  if (k < 2) {
    throw ConfigError("silhouette is undefined for a single cluster");
  }

  std::vector<double> dist_sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    if (cluster_sizes[point_cluster[i]] == 1) continue;  // singleton scores 0
    std::fill(dist_sums.begin(), dist_sums.end(), 0.0);
    const double* pi = reps.values.data() + idx[i] * d;
    for (std::size_t j = 0; j < s; ++j) {
      if (j == i) continue;
      const double* pj = reps.values.data() + idx[j] * d;
      double d2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = pi[c] - pj[c];
        d2 += diff * diff;
      }
      dist_sums[point_cluster[j]] += std::sqrt(d2);
    }
    const std::size_t own = point_cluster[i];
    const double a =
        dist_sums[own] / static_cast<double>(cluster_sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || cluster_sizes[c] == 0) continue;
      b = std::min(b, dist_sums[c] / static_cast<double>(cluster_sizes[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(s);
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw ConfigError("adjusted_rand_index: length mismatch " +
                      std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  if (a.size() < 2) {
    throw ConfigError("adjusted_rand_index needs at least 2 points");
  }
  std::unordered_map<int, std::size_t> ia, ib;
  for (int v : a) ia.emplace(v, ia.size());
  for (int v : b) ib.emplace(v, ib.size());
  const std::size_t ka = ia.size(), kb = ib.size();
  std::vector<std::size_t> table(ka * kb, 0), ra(ka, 0), rb(kb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t x = ia[a[i]], y = ib[b[i]];
    table[x * kb + y] += 1;
    ra[x] += 1;
    rb[y] += 1;
  }
  auto choose2 = [](std::size_t n) {
    return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  };
  double sum_nij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (std::size_t v : table) sum_nij += choose2(v);
  for (std::size_t v : ra) sum_a += choose2(v);
  for (std::size_t v : rb) sum_b += choose2(v);
  const double total = choose2(a.size());
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) {
    // Both partitions are trivial in the same way; identical labelings score 1.
    return sum_nij == max_index ? 1.0 : 0.0;
  }
  return (sum_nij - expected) / denom;
}

Tensor tower_correlation(const Tensor& tower_scores) {
  const std::size_t n = tower_scores.rows();
  const std::size_t k = tower_scores.cols();
  if (n < 2) {
    throw ConfigError("tower_correlation needs at least 2 rows");
  }
  std::vector<double> mean(k, 0.0), sd(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    double lo = tower_scores.at(0, t), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, tower_scores.at(i, t));
      hi = std::max(hi, tower_scores.at(i, t));
    }
    if (lo == hi) {
      throw ConfigError("tower_correlation: tower " + std::to_string(t) +
                        " has zero score variance");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) mean[t] += tower_scores.at(i, t);
  }
  for (std::size_t t = 0; t < k; ++t) mean[t] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const double c = tower_scores.at(i, t) - mean[t];
      sd[t] += c * c;
    }
  }
  for (std::size_t t = 0; t < k; ++t) sd[t] = std::sqrt(sd[t]);
  Tensor corr({k, k});
  for (std::size_t s = 0; s < k; ++s) {
    corr.at(s, s) = 1.0;
    for (std::size_t t = s + 1; t < k; ++t) {
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cov += (tower_scores.at(i, s) - mean[s]) *
               (tower_scores.at(i, t) - mean[t]);
      }
      const double r = cov / (sd[s] * sd[t]);
      corr.at(s, t) = r;
      corr.at(t, s) = r;
    }
  }
  return corr;
}

}  // namespace breaker
