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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "breaker/model.hpp"

namespace breaker {

// One user-item impression.
struct Record {
  std::string user_id;
  int item_id = 0;
  int label = 0;
  // Planted cluster of synthetic users; diagnostic only, never a model input.
  int true_cluster = -1;
  std::vector<int> features;
};

struct FeatureInfo {
  std::string name;
  std::size_t cardinality = 0;
};

struct DatasetManifest {
  int format_version = 1;
  std::size_t n_items = 0;
  std::vector<FeatureInfo> features;
  std::size_t train_records = 0, test_records = 0;
  std::size_t train_positives = 0, test_positives = 0;
  std::size_t train_users = 0, test_users = 0;
  std::string generator_config_json;  // resolved generator config echo
};

// Randomized exposure with planted user clusters. Each user draws a hidden
// cluster c; informative features equal c unless corrupted; the exposed item
// is fixed by the user-id hash; labels are Bernoulli of
// sigmoid(tendency[c] + preference_scale * A[c][item]).
struct SyntheticConfig {
  std::size_t n_users = 0;  // required
  std::size_t n_items = 0;  // required
  std::size_t k_true = 4;
  std::size_t informative_features = 3;
  std::size_t noise_features = 2;
  double corruption = 0.2;  // probability an informative feature is redrawn
  std::vector<double> tendency_logits;    // per-cluster; default spans [-3,-1]
  double preference_scale = 1.0;
  // Row-major k_true x n_items with zero row means; empty = generated from
  // the seed (standard normal, row-centered).
  std::vector<double> preference_matrix;
  std::size_t impressions_per_user = 1;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> resolved_tendencies() const;
  // The preference matrix actually used (explicit or generated).
  std::vector<double> resolved_preferences() const;
};

SyntheticConfig synthetic_config_from_json(const std::string& text);
std::string to_json(const SyntheticConfig& cfg);

struct Dataset {
  std::vector<Record> train, test;
  DatasetManifest manifest;
};

// FNV-1a over the UTF-8 bytes.
std::uint64_t fnv1a64(std::string_view s);

// Deterministic exposure bucket: fnv1a64(user_id) mod n_items.
int rct_assign(std::string_view user_id, std::size_t n_items);

Dataset generate_synthetic(const SyntheticConfig& cfg);

// train.csv / test.csv / manifest.json under `dir`.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

ModelDims dims_from_manifest(const DatasetManifest& manifest);

// Contiguous arrays for one mini-batch.
struct Batch {
  std::size_t n = 0;
  std::size_t n_features = 0;
  std::vector<int> features;  // n * n_features
  std::vector<int> items;
  std::vector<int> labels;

  BatchView view() const {
    return {n, {features.data(), features.size()}, {items.data(), items.size()},
            {labels.data(), labels.size()}};
  }
};

// Deterministic per-(seed, epoch) shuffle into batches covering every record
// exactly once; the last batch may be short.
std::vector<Batch> make_batches(const std::vector<Record>& records,
                                std::size_t batch_size, std::uint64_t seed,
                                std::size_t epoch);

}  // namespace breaker
