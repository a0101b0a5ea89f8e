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

#include "breaker/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "breaker/error.hpp"
#include "breaker/layers.hpp"
#include "breaker/rng.hpp"

namespace breaker {

namespace {

constexpr std::uint64_t kTagPreference = 0x70726566;  // generator sub-streams
constexpr std::uint64_t kTagUsers = 0x75736572;
constexpr std::uint64_t kTagShuffleBase = 0x62617463;

using ordered_json = nlohmann::ordered_json;

void check_keys(const ordered_json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + section);
    }
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

int rct_assign(std::string_view user_id, std::size_t n_items) {
  if (n_items == 0) throw ConfigError("rct_assign: n_items must be >= 1");
  return static_cast<int>(fnv1a64(user_id) % n_items);
}

void SyntheticConfig::validate() const {
  if (n_users == 0) throw ConfigError("data.n_users must be >= 1");
  if (n_items == 0) throw ConfigError("data.n_items must be >= 1");
  if (k_true < 2) throw ConfigError("data.k_true must be >= 2");
  if (informative_features + noise_features == 0) {
    throw ConfigError("data: at least one user feature is required");
  }
  if (corruption < 0.0 || corruption > 1.0) {
    throw ConfigError("data.corruption must lie in [0, 1]");
  }
  if (!tendency_logits.empty() && tendency_logits.size() != k_true) {
    throw ConfigError("data.tendency_logits must have k_true entries");
  }
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw ConfigError("data.test_fraction must lie in [0, 1)");
  }
  if (impressions_per_user == 0) {
    throw ConfigError("data.impressions_per_user must be >= 1");
  }
  if (!std::isfinite(preference_scale)) {
    throw ConfigError("data.preference_scale must be finite");
  }
  if (!preference_matrix.empty()) {
    if (preference_matrix.size() != k_true * n_items) {
      throw ConfigError("data.preference_matrix must be k_true x n_items");
    }
    for (std::size_t c = 0; c < k_true; ++c) {
      double row_sum = 0.0;
      for (std::size_t i = 0; i < n_items; ++i) {
        row_sum += preference_matrix[c * n_items + i];
      }
      if (std::abs(row_sum) > 1e-9) {
        throw ConfigError("data.preference_matrix row " + std::to_string(c) +
                          " does not sum to 0");
      }
    }
  }
}

std::vector<double> SyntheticConfig::resolved_tendencies() const {
  if (!tendency_logits.empty()) return tendency_logits;
  std::vector<double> beta(k_true);
  for (std::size_t c = 0; c < k_true; ++c) {
    beta[c] = -3.0 + 2.0 * static_cast<double>(c) /
                         static_cast<double>(k_true - 1);
  }
  return beta;
}

std::vector<double> SyntheticConfig::resolved_preferences() const {
  if (!preference_matrix.empty()) return preference_matrix;
  Rng rng(derive_seed(seed, kTagPreference));
  std::vector<double> a(k_true * n_items);
  for (double& v : a) v = rng.normal();
  for (std::size_t c = 0; c < k_true; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_items; ++i) mean += a[c * n_items + i];
    mean /= static_cast<double>(n_items);
    for (std::size_t i = 0; i < n_items; ++i) a[c * n_items + i] -= mean;
  }
  return a;
}

SyntheticConfig synthetic_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "data",
             {"n_users", "n_items", "k_true", "informative_features",
              "noise_features", "corruption", "tendency_logits",
              "preference_scale", "preference_matrix", "impressions_per_user",
              "test_fraction", "seed"});
  SyntheticConfig cfg;
  if (!j.contains("n_users")) throw ConfigError("missing required key data.n_users");
  if (!j.contains("n_items")) throw ConfigError("missing required key data.n_items");
  try {
    cfg.n_users = j.at("n_users").get<std::size_t>();
    cfg.n_items = j.at("n_items").get<std::size_t>();
    if (j.contains("k_true")) cfg.k_true = j["k_true"].get<std::size_t>();
    if (j.contains("informative_features")) {
      cfg.informative_features = j["informative_features"].get<std::size_t>();
    }
    if (j.contains("noise_features")) {
      cfg.noise_features = j["noise_features"].get<std::size_t>();
    }
    if (j.contains("corruption")) cfg.corruption = j["corruption"].get<double>();
    if (j.contains("tendency_logits")) {
      cfg.tendency_logits = j["tendency_logits"].get<std::vector<double>>();
    }
    if (j.contains("preference_scale")) {
      cfg.preference_scale = j["preference_scale"].get<double>();
    }
    if (j.contains("preference_matrix")) {
      for (const auto& row : j["preference_matrix"]) {
        for (const auto& v : row) {
          cfg.preference_matrix.push_back(v.get<double>());
        }
      }
    }
    if (j.contains("impressions_per_user")) {
      cfg.impressions_per_user = j["impressions_per_user"].get<std::size_t>();
    }
    if (j.contains("test_fraction")) {
      cfg.test_fraction = j["test_fraction"].get<double>();
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value in data config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string to_json(const SyntheticConfig& cfg) {
  ordered_json j;
  j["n_users"] = cfg.n_users;
  j["n_items"] = cfg.n_items;
  j["k_true"] = cfg.k_true;
  j["informative_features"] = cfg.informative_features;
  j["noise_features"] = cfg.noise_features;
  j["corruption"] = cfg.corruption;
  j["tendency_logits"] = cfg.resolved_tendencies();
  j["preference_scale"] = cfg.preference_scale;
  const std::vector<double> a = cfg.resolved_preferences();
  ordered_json rows = ordered_json::array();
  for (std::size_t c = 0; c < cfg.k_true; ++c) {
    ordered_json row = ordered_json::array();
    for (std::size_t i = 0; i < cfg.n_items; ++i) {
      row.push_back(a[c * cfg.n_items + i]);
    }
    rows.push_back(std::move(row));
  }
  j["preference_matrix"] = std::move(rows);
  j["impressions_per_user"] = cfg.impressions_per_user;
  j["test_fraction"] = cfg.test_fraction;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

Dataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::vector<double> beta = cfg.resolved_tendencies();
  const std::vector<double> pref = cfg.resolved_preferences();
  const std::size_t m = cfg.informative_features + cfg.noise_features;
  const std::uint64_t user_stream = derive_seed(cfg.seed, kTagUsers);

  Dataset ds;
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    Rng rng(derive_seed(user_stream, u));
    const std::string user_id = "u" + std::to_string(u);
    const auto cluster = rng.uniform_index(cfg.k_true);
    std::vector<int> features(m);
    for (std::size_t f = 0; f < cfg.informative_features; ++f) {
      if (rng.uniform() < cfg.corruption) {
        features[f] = static_cast<int>(rng.uniform_index(cfg.k_true));
      } else {
        features[f] = static_cast<int>(cluster);
      }
    }
    for (std::size_t f = cfg.informative_features; f < m; ++f) {
      features[f] = static_cast<int>(rng.uniform_index(cfg.k_true));
    }
    const int item = rct_assign(user_id, cfg.n_items);
    const bool is_test = rng.uniform() < cfg.test_fraction;
    const double logit =
        beta[cluster] + cfg.preference_scale *
                            pref[cluster * cfg.n_items +
                                 static_cast<std::size_t>(item)];
    const double p = sigmoid_scalar(logit);
    std::vector<Record>& out = is_test ? ds.test : ds.train;
    for (std::size_t r = 0; r < cfg.impressions_per_user; ++r) {
      Record rec;
      rec.user_id = user_id;
      rec.item_id = item;
      rec.label = rng.uniform() < p ? 1 : 0;
      rec.true_cluster = static_cast<int>(cluster);
      rec.features = features;
      out.push_back(std::move(rec));
    }
  }

  DatasetManifest& mf = ds.manifest;
  mf.n_items = cfg.n_items;
  for (std::size_t f = 0; f < m; ++f) {
    mf.features.push_back({"f" + std::to_string(f), cfg.k_true});
  }
  mf.train_records = ds.train.size();
  mf.test_records = ds.test.size();
  for (const Record& r : ds.train) mf.train_positives += r.label;
  for (const Record& r : ds.test) mf.test_positives += r.label;
  mf.train_users = ds.train.size() / cfg.impressions_per_user;
  mf.test_users = ds.test.size() / cfg.impressions_per_user;
  mf.generator_config_json = to_json(cfg);
  return ds;
}

namespace {

void write_records_csv(const std::vector<Record>& records, std::size_t m,
                       const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << "user_id,item_id,label,true_cluster";
  for (std::size_t f = 0; f < m; ++f) out << ",f" << f;
  out << "\n";
  for (const Record& r : records) {
    out << r.user_id << "," << r.item_id << "," << r.label << ","
        << r.true_cluster;
    for (int v : r.features) out << "," << v;
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + file.string());
}

std::vector<Record> read_records_csv(const std::filesystem::path& file,
                                     std::size_t m) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty data file " + file.string());
  std::vector<Record> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        parts.push_back(line.substr(start));
        break;
      }
      parts.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (parts.size() != 4 + m) {
      throw IoError(file.string() + ":" + std::to_string(line_no) +
                    ": expected " + std::to_string(4 + m) + " columns, got " +
                    std::to_string(parts.size()));
    }
    Record r;
    try {
      r.user_id = parts[0];
      r.item_id = std::stoi(parts[1]);
      r.label = std::stoi(parts[2]);
      r.true_cluster = std::stoi(parts[3]);
      r.features.reserve(m);
      for (std::size_t f = 0; f < m; ++f) {
        r.features.push_back(std::stoi(parts[4 + f]));
      }
    } catch (const std::exception&) {
      throw IoError(file.string() + ":" + std::to_string(line_no) +
                    ": malformed row");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::size_t count_users(const std::vector<Record>& records) {
  std::size_t users = 0;
  std::unordered_map<std::string, bool> seen;
  for (const Record& r : records) {
    if (seen.emplace(r.user_id, true).second) ++users;
  }
  return users;
}

}  // namespace

void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
  const std::size_t m = ds.manifest.features.size();
  write_records_csv(ds.train, m, dir / "train.csv");
  write_records_csv(ds.test, m, dir / "test.csv");

  ordered_json j;
  j["format_version"] = ds.manifest.format_version;
  j["n_items"] = ds.manifest.n_items;
  ordered_json feats = ordered_json::array();
  for (const FeatureInfo& f : ds.manifest.features) {
    feats.push_back({{"name", f.name}, {"cardinality", f.cardinality}});
  }
  j["features"] = std::move(feats);
  j["counts"] = {{"train_records", ds.manifest.train_records},
                 {"test_records", ds.manifest.test_records},
                 {"train_positives", ds.manifest.train_positives},
                 {"test_positives", ds.manifest.test_positives},
                 {"train_users", ds.manifest.train_users},
                 {"test_users", ds.manifest.test_users}};
  if (!ds.manifest.generator_config_json.empty()) {
    j["generator_config"] =
        ordered_json::parse(ds.manifest.generator_config_json);
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot open manifest.json for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest.json");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("invalid manifest.json: " + std::string(e.what()));
  }
  Dataset ds;
  DatasetManifest& mf = ds.manifest;
  try {
    mf.format_version = j.at("format_version").get<int>();
    mf.n_items = j.at("n_items").get<std::size_t>();
    for (const auto& f : j.at("features")) {
      mf.features.push_back({f.at("name").get<std::string>(),
                             f.at("cardinality").get<std::size_t>()});
    }
    const auto& counts = j.at("counts");
    mf.train_records = counts.at("train_records").get<std::size_t>();
    mf.test_records = counts.at("test_records").get<std::size_t>();
    mf.train_positives = counts.at("train_positives").get<std::size_t>();
    mf.test_positives = counts.at("test_positives").get<std::size_t>();
    mf.train_users = counts.at("train_users").get<std::size_t>();
    mf.test_users = counts.at("test_users").get<std::size_t>();
    if (j.contains("generator_config")) {
      mf.generator_config_json = j["generator_config"].dump(2);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest.json missing fields: " + std::string(e.what()));
  }
  if (mf.format_version != 1) {
    throw IoError("unsupported dataset format_version " +
                  std::to_string(mf.format_version));
  }

  const std::size_t m = mf.features.size();
  ds.train = read_records_csv(dir / "train.csv", m);
  ds.test = read_records_csv(dir / "test.csv", m);

  auto check = [&](const char* what, std::size_t got, std::size_t want) {
    if (got != want) {
      throw IoError("manifest mismatch: " + std::string(what) + " is " +
                    std::to_string(got) + ", manifest says " +
                    std::to_string(want));
    }
  };
  check("train record count", ds.train.size(), mf.train_records);
  check("test record count", ds.test.size(), mf.test_records);
  std::size_t tp = 0, sp = 0;
  for (const Record& r : ds.train) tp += r.label;
  for (const Record& r : ds.test) sp += r.label;
  check("train positive count", tp, mf.train_positives);
  check("test positive count", sp, mf.test_positives);
  check("train user count", count_users(ds.train), mf.train_users);
  check("test user count", count_users(ds.test), mf.test_users);
  for (const auto* split : {&ds.train, &ds.test}) {
    for (const Record& r : *split) {
      if (r.label != 0 && r.label != 1) {
        throw IoError("label " + std::to_string(r.label) + " for user " +
                      r.user_id + " is not 0/1");
      }
      if (r.item_id < 0 || static_cast<std::size_t>(r.item_id) >= mf.n_items) {
        throw IoError("item id " + std::to_string(r.item_id) + " for user " +
                      r.user_id + " outside catalog of " +
                      std::to_string(mf.n_items));
      }
      for (std::size_t f = 0; f < m; ++f) {
        if (r.features[f] < 0 || static_cast<std::size_t>(r.features[f]) >=
                                     mf.features[f].cardinality) {
          throw IoError("feature " + mf.features[f].name + " value " +
                        std::to_string(r.features[f]) + " for user " +
                        r.user_id + " outside cardinality " +
                        std::to_string(mf.features[f].cardinality));
        }
      }
    }
  }
  return ds;
}

ModelDims dims_from_manifest(const DatasetManifest& manifest) {
  ModelDims dims;
  for (const FeatureInfo& f : manifest.features) {
    dims.user_cardinalities.push_back(f.cardinality);
  }
  dims.n_items = manifest.n_items;
  return dims;
}

std::vector<Batch> make_batches(const std::vector<Record>& records,
                                std::size_t batch_size, std::uint64_t seed,
                                std::size_t epoch) {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (records.empty()) throw ConfigError("cannot batch an empty record set");
  const std::size_t m = records.front().features.size();
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, kTagShuffleBase + epoch));
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    Batch b;
    b.n = n;
    b.n_features = m;
    b.features.reserve(n * m);
    b.items.reserve(n);
    b.labels.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      const Record& rec = records[order[start + r]];
      b.features.insert(b.features.end(), rec.features.begin(),
                        rec.features.end());
      b.items.push_back(rec.item_id);
      b.labels.push_back(rec.label);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace breaker
