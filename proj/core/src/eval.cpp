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

#include "breaker/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "breaker/error.hpp"
#include "breaker/layers.hpp"
#include "breaker/rng.hpp"

namespace breaker {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

UserTable build_user_table(const BreakerNet& net, const ParamSet& params,
                           Variant variant,
                           const std::vector<Record>& records) {
  const std::size_t m = net.n_user_features();
  UserTable ut;
  for (const Record& r : records) {
    if (ut.row_of.count(r.user_id)) continue;
    ut.row_of.emplace(r.user_id, static_cast<int>(ut.ids.size()));
    ut.ids.push_back(r.user_id);
    ut.features.insert(ut.features.end(), r.features.begin(),
                       r.features.end());
    ut.true_cluster.push_back(r.true_cluster);
  }
  const std::size_t u = ut.ids.size();
  ut.reps = net.user_reps(params, ut.features, u);
  const std::size_t k = net.dims().clusters;
  if (variant == Variant::kBreaker1Minus) {
    ut.mixture = Tensor({u, k});
    std::fill(ut.mixture.values.begin(), ut.mixture.values.end(),
              1.0 / static_cast<double>(k));
  } else {
    ut.mixture =
        soft_assign(ut.reps, params.at(BreakerNet::kCentroids), net.dims().alpha);
  }
  ut.hard_cluster.resize(u);
  for (std::size_t i = 0; i < u; ++i) {
    const auto row = ut.mixture.row(i);
    ut.hard_cluster[i] = static_cast<int>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  if (m != 0 && ut.features.size() != u * m) {
    throw ConfigError("user table: inconsistent feature widths");
  }
  return ut;
}

Tensor score_matrix(const BreakerNet& net, const ParamSet& params,
                    const UserTable& users, Tensor* tower_scores) {
  const std::size_t u = users.size();
  const std::size_t n_items = net.dims().n_items;
  const std::size_t k = net.dims().clusters;
  const std::size_t du = net.dims().user_rep_dim();
  const std::size_t di = net.dims().item_rep_dim();

  std::vector<int> all_items(n_items);
  for (std::size_t i = 0; i < n_items; ++i) all_items[i] = static_cast<int>(i);
  const Tensor e_items = net.item_reps(params, all_items, n_items);

  Tensor scores({u, n_items});
  if (tower_scores) *tower_scores = Tensor({u, n_items * k});
  std::vector<double> e_in(du + di);
  for (std::size_t row = 0; row < u; ++row) {
    std::copy(users.reps.row(row).begin(), users.reps.row(row).end(),
              e_in.begin());
    for (std::size_t item = 0; item < n_items; ++item) {
      std::copy(e_items.row(item).begin(), e_items.row(item).end(),
                e_in.begin() + du);
      double agg = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        const std::vector<double> out = net.tower(t).forward(params, e_in);
        const double s = sigmoid_scalar(out[0]);
        if (tower_scores) tower_scores->at(row, item * k + t) = s;
        agg += s * users.mixture.at(row, t);
      }
      scores.at(row, item) = agg;
    }
  }
  return scores;
}

EvalReport evaluate(const BreakerNet& net, const ParamSet& params,
                    Variant variant, const std::vector<Record>& test,
                    const EvalOptions& opt) {
  if (test.empty()) throw ConfigError("evaluate: empty test set");
  const UserTable ut = build_user_table(net, params, variant, test);
  const bool need_towers = opt.with_tower_correlation;
  Tensor tower_full;
  const Tensor scores =
      score_matrix(net, params, ut, need_towers ? &tower_full : nullptr);
  const std::size_t k = net.dims().clusters;

  std::vector<LoggedRecord> recs;
  recs.reserve(test.size());
  std::vector<double> logged_scores;
  logged_scores.reserve(test.size());
  for (const Record& r : test) {
    const int row = ut.row_of.at(r.user_id);
    recs.push_back({row, r.item_id, r.label});
    logged_scores.push_back(
        scores.at(static_cast<std::size_t>(row),
                  static_cast<std::size_t>(r.item_id)));
  }

  EvalReport rep;
  rep.counts.test_records = test.size();
  for (const Record& r : test) rep.counts.positives += r.label;
  rep.counts.users = ut.size();

  rep.recall_at_1 = recall_at_1(scores, recs);
  rep.aer = average_expected_response(scores, recs);
  const ItemAuc ia = item_based_auc(recs, logged_scores);
  rep.item_auc = ia.per_item;
  rep.item_auc_macro = ia.macro;
  rep.item_auc_skipped = ia.skipped;
  rep.counts.auc_items = ia.per_item.size();

  if (opt.with_silhouette) {
    try {
      rep.silhouette = silhouette(ut.reps, ut.hard_cluster, opt.silhouette_cap,
                                  opt.seed);
      rep.counts.silhouette_sample = std::min(opt.silhouette_cap, ut.size());
    } catch (const ConfigError&) {
      rep.silhouette.reset();  // degenerate hard assignment
    }
  }
  if (opt.with_ari) {
    bool have_truth = !ut.true_cluster.empty();
    for (int c : ut.true_cluster) have_truth = have_truth && c >= 0;
    if (have_truth) {
      rep.ari = adjusted_rand_index(ut.hard_cluster, ut.true_cluster);
    }
  }
  if (opt.with_tower_correlation) {
    Tensor per_record({test.size(), k});
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto row = static_cast<std::size_t>(recs[i].user_row);
      const auto item = static_cast<std::size_t>(recs[i].item);
      for (std::size_t t = 0; t < k; ++t) {
        per_record.at(i, t) = tower_full.at(row, item * k + t);
      }
    }
    try {
      rep.tower_correlation = tower_correlation(per_record);
    } catch (const ConfigError&) {
      rep.tower_correlation.reset();  // a constant tower column
    }
  }
  return rep;
}

std::string eval_report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["recall_at_1"] = report.recall_at_1;
  j["aer"] = report.aer;
  j["item_auc_macro"] = report.item_auc_macro;
  nlohmann::ordered_json per_item = nlohmann::ordered_json::object();
  for (const auto& [item, v] : report.item_auc) {
    per_item[std::to_string(item)] = v;
  }
  j["item_auc"] = std::move(per_item);
  j["item_auc_skipped"] = report.item_auc_skipped;
  if (report.silhouette) {
    j["silhouette"] = *report.silhouette;
  } else {
    j["silhouette"] = nullptr;
  }
  if (report.ari) {
    j["ari"] = *report.ari;
  } else {
    j["ari"] = nullptr;
  }
  if (report.tower_correlation) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    const Tensor& c = *report.tower_correlation;
    for (std::size_t i = 0; i < c.rows(); ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t t = 0; t < c.cols(); ++t) row.push_back(c.at(i, t));
      rows.push_back(std::move(row));
    }
    j["tower_correlation"] = std::move(rows);
  } else {
    j["tower_correlation"] = nullptr;
  }
  j["counts"] = {{"test_records", report.counts.test_records},
                 {"positives", report.counts.positives},
                 {"users", report.counts.users},
                 {"auc_items", report.counts.auc_items},
                 {"silhouette_sample", report.counts.silhouette_sample}};
  return j.dump(2);
}

void export_representations(const BreakerNet& net, const ParamSet& params,
                            Variant variant, const std::vector<Record>& test,
                            const std::filesystem::path& out, std::size_t cap,
                            std::uint64_t seed) {
  const UserTable ut = build_user_table(net, params, variant, test);
  std::vector<std::size_t> rows(ut.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (cap > 0 && rows.size() > cap) {
    Rng rng(seed);
    rows = rng.sample_indices(rows.size(), cap);
    std::sort(rows.begin(), rows.end());
  }
  bool have_truth = true;
  for (std::size_t r : rows) have_truth = have_truth && ut.true_cluster[r] >= 0;

  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot open " + out.string() + " for writing");
  const std::size_t k = ut.mixture.cols();
  const std::size_t d = ut.reps.cols();
  f << "user_id,cluster";
  for (std::size_t t = 0; t < k; ++t) f << ",q" << t;
  for (std::size_t c = 0; c < d; ++c) f << ",e" << c;
  if (have_truth) f << ",true_cluster";
  f << "\n";
  for (std::size_t r : rows) {
    f << ut.ids[r] << "," << ut.hard_cluster[r];
    for (std::size_t t = 0; t < k; ++t) {
      f << "," << format_double(ut.mixture.at(r, t));
    }
    for (std::size_t c = 0; c < d; ++c) {
      f << "," << format_double(ut.reps.at(r, c));
    }
    if (have_truth) f << "," << ut.true_cluster[r];
    f << "\n";
  }
  if (!f) throw IoError("failed writing " + out.string());
}

}  // namespace breaker
