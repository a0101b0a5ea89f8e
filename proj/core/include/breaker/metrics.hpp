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
#include <span>
#include <vector>

#include "breaker/tensor.hpp"

namespace breaker {

// One logged impression mapped onto a score-matrix row.
struct LoggedRecord {
  int user_row = 0;  // row into the [users x items] score matrix
  int item = 0;
  int label = 0;
};

// Item chosen for a user: argmax of its score row, ties broken by ascending
// item id.
int policy_choice(const Tensor& scores, std::size_t user_row);

// Fraction of positive records whose logged item is the policy's top choice.
// Throws ConfigError when there is no positive record.
double recall_at_1(const Tensor& scores, std::span<const LoggedRecord> records);

// Mean over all records of label * [policy choice == logged item]. Unbiased
// for uniformly randomized exposure.
double average_expected_response(const Tensor& scores,
                                 std::span<const LoggedRecord> records);

// Rank-based (Mann-Whitney) AUC; tied scores contribute 1/2. Requires at
// least one positive and one negative label.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ItemAuc {
  std::map<int, double> per_item;
  double macro = 0.0;
  std::vector<int> skipped;  // items lacking both classes
};

// AUC per logged item over (records[i], scores[i]) pairs. Throws when no
// item has both classes.
ItemAuc item_based_auc(std::span<const LoggedRecord> records,
                       std::span<const double> scores);

// Mean silhouette with Euclidean distance over a seeded subsample of at most
// `sample_cap` points. Points in singleton clusters score 0, as do points
// with a(i) = b(i) = 0. Requires at least two clusters among the sampled
// points.
double silhouette(const Tensor& reps, std::span<const int> labels,
                  std::size_t sample_cap = 3000, std::uint64_t seed = 0);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

// Pearson correlation between every pair of tower-score columns. Throws
// naming the tower on a zero-variance column.
Tensor tower_correlation(const Tensor& tower_scores);

}  // namespace breaker
