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

#include "breaker/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "breaker/adam.hpp"
#include "breaker/error.hpp"
#include "breaker/eval.hpp"
#include "breaker/kmeans.hpp"
#include "breaker/rng.hpp"

namespace breaker {

namespace {

constexpr std::uint64_t kTagInit = 0x696e6974;
constexpr std::uint64_t kTagKmeansSample = 0x6b73616d;
constexpr std::uint64_t kTagKmeans = 0x6b6d6e73;
constexpr std::uint64_t kTagSplit = 0x73706c74;

using ordered_json = nlohmann::ordered_json;

}  // namespace

void TrainConfig::validate() const {
  if (clusters == 0) throw ConfigError("train.k must be >= 1");
  if (lambda < 0.0) throw ConfigError("train.lambda must be >= 0");
  if (!(alpha > 0.0)) throw ConfigError("train.alpha must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (embedding_dim == 0) throw ConfigError("train.embedding_dim must be >= 1");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("train.test_fraction must lie in [0, 1)");
  }
}

TrainConfig train_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  static const char* allowed[] = {
      "k",          "lambda",        "alpha",        "sync_period",
      "learning_rate", "batch_size", "epochs",       "seed",
      "variant",    "embedding_dim", "rem_widths",   "tower_widths",
      "kmeans_sample_cap", "test_fraction"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in train");
  }
  TrainConfig cfg;
  try {
    if (j.contains("k")) cfg.clusters = j["k"].get<std::size_t>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("sync_period")) {
      cfg.sync_period = j["sync_period"].get<std::size_t>();
    }
    if (j.contains("learning_rate")) {
      cfg.learning_rate = j["learning_rate"].get<double>();
    }
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("variant")) {
      cfg.variant = variant_from_string(j["variant"].get<std::string>());
    }
    if (j.contains("embedding_dim")) {
      cfg.embedding_dim = j["embedding_dim"].get<std::size_t>();
    }
    if (j.contains("rem_widths")) {
      cfg.rem_widths = j["rem_widths"].get<std::vector<std::size_t>>();
    }
    if (j.contains("tower_widths")) {
      cfg.tower_widths = j["tower_widths"].get<std::vector<std::size_t>>();
    }
    if (j.contains("kmeans_sample_cap")) {
      cfg.kmeans_sample_cap = j["kmeans_sample_cap"].get<std::size_t>();
    }
    if (j.contains("test_fraction")) {
      cfg.test_fraction = j["test_fraction"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value in train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const TrainConfig& cfg) {
  ordered_json j;
  j["k"] = cfg.clusters;
  j["lambda"] = cfg.lambda;
  j["alpha"] = cfg.alpha;
  j["sync_period"] = cfg.sync_period;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["variant"] = to_string(cfg.variant);
  j["embedding_dim"] = cfg.embedding_dim;
  j["rem_widths"] = cfg.rem_widths;
  j["tower_widths"] = cfg.tower_widths;
  j["kmeans_sample_cap"] = cfg.kmeans_sample_cap;
  j["test_fraction"] = cfg.test_fraction;
  return j.dump(2);
}

ModelDims dims_for(const DatasetManifest& manifest, const TrainConfig& cfg) {
  ModelDims dims = dims_from_manifest(manifest);
  dims.embedding_dim = cfg.embedding_dim;
  dims.rem_widths = cfg.rem_widths;
  dims.tower_widths = cfg.tower_widths;
  dims.clusters = cfg.clusters;
  dims.alpha = cfg.alpha;
  return dims;
}

std::pair<std::vector<Record>, std::vector<Record>> split_by_user(
    const std::vector<Record>& records, double test_fraction,
    std::uint64_t seed) {
  std::vector<Record> train, test;
  for (const Record& r : records) {
    Rng rng(derive_seed(derive_seed(seed, kTagSplit), fnv1a64(r.user_id)));
    (rng.uniform() < test_fraction ? test : train).push_back(r);
  }
  return {std::move(train), std::move(test)};
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg,
                  bool eval_each_epoch, const TrainHooks* hooks,
                  std::ostream* progress) {
  cfg.validate();
  if (ds.train.empty()) throw ConfigError("train: empty training set");
  const ModelDims dims = dims_for(ds.manifest, cfg);
  BreakerNet net(dims);

  TrainResult res;
  res.dims = dims;
  res.params = net.init_params(derive_seed(cfg.seed, kTagInit));
  res.target = net.make_target(res.params);

  // Centroid init: k-means over representations of the distinct users, in
  // first-appearance order, capped by a seeded subsample.
  {
    std::vector<int> feats;
    std::unordered_set<std::string> seen;
    const std::size_t m = net.n_user_features();
    std::size_t users = 0;
    for (const Record& r : ds.train) {
      if (!seen.insert(r.user_id).second) continue;
      feats.insert(feats.end(), r.features.begin(), r.features.end());
      ++users;
    }
    if (cfg.kmeans_sample_cap > 0 && users > cfg.kmeans_sample_cap) {
      Rng rng(derive_seed(cfg.seed, kTagKmeansSample));
      std::vector<std::size_t> keep =
          rng.sample_indices(users, cfg.kmeans_sample_cap);
      std::sort(keep.begin(), keep.end());
      std::vector<int> sub;
      sub.reserve(keep.size() * m);
      for (std::size_t i : keep) {
        sub.insert(sub.end(), feats.begin() + i * m, feats.begin() + (i + 1) * m);
      }
      feats = std::move(sub);
      users = keep.size();
    }
    const Tensor reps = net.user_reps(res.params, feats, users);
    const Tensor mu =
        kmeans_init(reps, cfg.clusters, derive_seed(cfg.seed, kTagKmeans));
    res.params.at(BreakerNet::kCentroids).values = mu.values;
  }

  const std::size_t steps_per_epoch =
      (ds.train.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::size_t sync_period =
      cfg.sync_period > 0 ? cfg.sync_period : (steps_per_epoch + 9) / 10;
  if (cfg.variant == Variant::kBreaker2Minus) sync_period = 1;
  res.sync_period = sync_period;

  const MixtureSpec mix = MixtureSpec::for_variant(cfg.variant);
  const bool clustering = cfg.variant != Variant::kBreaker1Minus;

  AdamState adam;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<Batch> batches =
        make_batches(ds.train, cfg.batch_size, cfg.seed, epoch);
    double sum_l = 0.0, sum_lp = 0.0, sum_lc = 0.0;
    for (const Batch& b : batches) {
      const BatchView bv = b.view();
      const BatchCache cache = net.forward(res.params, bv, mix);
      Tensor pseudo;
      const Tensor* pseudo_ptr = nullptr;
      if (clustering) {
        const Tensor target_reps =
            net.user_reps(res.target, bv.user_features, bv.n);
        const Tensor q_target = soft_assign(
            target_reps, res.params.at(BreakerNet::kCentroids), cfg.alpha);
        pseudo = target_distribution(q_target);
        pseudo_ptr = &pseudo;
      }
      GradMap grads;
      const BatchLoss bl =
          net.backward(res.params, bv, cache, pseudo_ptr, cfg.lambda, grads);
      if (!std::isfinite(bl.loss)) {
        throw NumericError("train: non-finite loss at step " +
                           std::to_string(step + 1) + " (loss_p=" +
                           std::to_string(bl.loss_p) + ", loss_c=" +
                           std::to_string(bl.loss_c) + ")");
      }
      adam_step(res.params, grads, adam, cfg.learning_rate);
      ++step;
      const bool synced = step % sync_period == 0;
      if (synced) net.sync_target(res.params, res.target);
      if (hooks && hooks->on_step) {
        hooks->on_step(step, synced, res.params, res.target);
      }
      sum_l += bl.loss;
      sum_lp += bl.loss_p;
      sum_lc += bl.loss_c;
    }
    EpochLog log;
    log.epoch = epoch;
    const auto nb = static_cast<double>(batches.size());
    log.loss = sum_l / nb;
    log.loss_p = sum_lp / nb;
    log.loss_c = sum_lc / nb;
    if (eval_each_epoch && !ds.test.empty()) {
      EvalOptions opt;
      opt.with_silhouette = false;
      opt.with_ari = false;
      opt.with_tower_correlation = false;
      const EvalReport r = evaluate(net, res.params, cfg.variant, ds.test, opt);
      log.recall_at_1 = r.recall_at_1;
      log.item_auc_macro = r.item_auc_macro;
      log.aer = r.aer;
    }
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    if (progress) {
      (*progress) << "epoch " << epoch << " loss " << log.loss << " loss_p "
                  << log.loss_p << " loss_c " << log.loss_c;
      if (log.recall_at_1) {
        (*progress) << " recall@1 " << *log.recall_at_1 << " item_auc "
                    << *log.item_auc_macro << " aer " << *log.aer;
      }
      (*progress) << " (" << log.wall_seconds << "s)\n";
    }
    res.epochs.push_back(std::move(log));
  }
  res.steps = step;
  return res;
}

void write_epoch_csv(const std::vector<EpochLog>& logs,
                     const std::filesystem::path& file) {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw IoError("cannot open " + file.string() + " for writing");
  f << "epoch,loss,loss_p,loss_c,recall_at_1,item_auc_macro,aer,seconds\n";
  for (const EpochLog& e : logs) {
    f << e.epoch << "," << format_double(e.loss) << ","
      << format_double(e.loss_p) << "," << format_double(e.loss_c) << ",";
    if (e.recall_at_1) f << format_double(*e.recall_at_1);
    f << ",";
    if (e.item_auc_macro) f << format_double(*e.item_auc_macro);
    f << ",";
    if (e.aer) f << format_double(*e.aer);
    // `seconds` stays empty: wall time would break byte-level reproducibility.
    f << ",\n";
  }
  if (!f) throw IoError("failed writing " + file.string());
}

}  // namespace breaker
