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
#include <iosfwd>
#include <optional>

#include "breaker/data.hpp"
#include "breaker/model.hpp"

namespace breaker {

struct TrainConfig {
  std::size_t clusters = 4;   // K
  double lambda = 0.1;        // clustering-loss weight
  double alpha = 1.0;         // Student-t degrees of freedom
  std::size_t sync_period = 0;  // M; 0 resolves to ceil(0.1 * steps/epoch)
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  Variant variant = Variant::kBreaker;
  std::size_t embedding_dim = 10;
  std::vector<std::size_t> rem_widths = {256, 64};
  std::vector<std::size_t> tower_widths = {32, 10};
  std::size_t kmeans_sample_cap = 100000;
  double test_fraction = 0.2;  // only used when carving a split locally

  void validate() const;
};

TrainConfig train_config_from_json(const std::string& text);
std::string to_json(const TrainConfig& cfg);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double loss_p = 0.0;
  double loss_c = 0.0;
  // Reported on the progress stream; the persisted CSV keeps its `seconds`
  // column empty so logs stay byte-reproducible across runs.
  double wall_seconds = 0.0;
  std::optional<double> recall_at_1;
  std::optional<double> item_auc_macro;
  std::optional<double> aer;
};

struct TrainHooks {
  // After each optimizer step (and target sync, when one happened).
  std::function<void(std::size_t step, bool synced, const ParamSet& params,
                     const ParamSet& target)>
      on_step;
};

struct TrainResult {
  ModelDims dims;
  ParamSet params;  // main network plus centroids
  ParamSet target;  // stale user-side copy
  std::vector<EpochLog> epochs;
  std::size_t steps = 0;
  std::size_t sync_period = 0;  // resolved M
};

// Joint training: k-means centroid init from initial-parameter user
// representations, per-batch pseudo-labels from the target network, one Adam
// step per batch on parameters and centroids, target sync every M steps.
TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                  bool eval_each_epoch = false,
                  const TrainHooks* hooks = nullptr,
                  std::ostream* progress = nullptr);

void write_epoch_csv(const std::vector<EpochLog>& logs,
                     const std::filesystem::path& file);

ModelDims dims_for(const DatasetManifest& manifest, const TrainConfig& cfg);

// Splits records into train/test by user id hash at the given fraction;
// used by in-memory experiments when no file split exists.
std::pair<std::vector<Record>, std::vector<Record>> split_by_user(
    const std::vector<Record>& records, double test_fraction,
    std::uint64_t seed);

}  // namespace breaker
