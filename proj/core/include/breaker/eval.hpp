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

#include <filesystem>
#include <optional>
#include <unordered_map>

#include "breaker/data.hpp"
#include "breaker/metrics.hpp"
#include "breaker/model.hpp"

namespace breaker {

struct EvalOptions {
  bool with_silhouette = true;
  bool with_ari = true;
  bool with_tower_correlation = true;
  std::size_t silhouette_cap = 3000;
  std::uint64_t seed = 0;
};

struct EvalCounts {
  std::size_t test_records = 0;
  std::size_t positives = 0;
  std::size_t users = 0;
  std::size_t auc_items = 0;
  std::size_t silhouette_sample = 0;
};

struct EvalReport {
  double recall_at_1 = 0.0;
  double aer = 0.0;
  std::map<int, double> item_auc;
  double item_auc_macro = 0.0;
  std::vector<int> item_auc_skipped;
  std::optional<double> silhouette;  // absent when assignments are degenerate
  std::optional<double> ari;         // planted datasets only
  std::optional<Tensor> tower_correlation;
  EvalCounts counts;
};

// Unique users of a record list in first-appearance order, with frozen-model
// per-user quantities.
struct UserTable {
  std::vector<std::string> ids;
  std::vector<int> features;       // U * n_user_features
  Tensor reps;                     // U x d
  Tensor mixture;                  // U x K
  std::vector<int> hard_cluster;   // argmax of the mixture row
  std::vector<int> true_cluster;   // -1 when unknown
  std::unordered_map<std::string, int> row_of;

  std::size_t size() const { return ids.size(); }
};

UserTable build_user_table(const BreakerNet& net, const ParamSet& params,
                           Variant variant,
                           const std::vector<Record>& records);

// Per-(user, item) scores over the whole catalog, plus per-pair tower scores
// when `tower_scores` is given (shape [U, I*K], tower-major within an item).
Tensor score_matrix(const BreakerNet& net, const ParamSet& params,
                    const UserTable& users, Tensor* tower_scores = nullptr);

EvalReport evaluate(const BreakerNet& net, const ParamSet& params,
                    Variant variant, const std::vector<Record>& test,
                    const EvalOptions& opt = {});

std::string eval_report_to_json(const EvalReport& report);

// CSV of up to `cap` seeded-sampled users:
// user_id,cluster,q0..q{K-1},e0..e{d-1}[,true_cluster]
void export_representations(const BreakerNet& net, const ParamSet& params,
                            Variant variant, const std::vector<Record>& test,
                            const std::filesystem::path& out, std::size_t cap,
                            std::uint64_t seed);

// Round-trip-exact decimal formatting used in all CSV output.
std::string format_double(double v);

}  // namespace breaker
