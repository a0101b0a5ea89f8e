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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "breaker/error.hpp"
#include "breaker/metrics.hpp"
#include "breaker/rng.hpp"

using namespace breaker;

namespace {

// Literal double-loop transcription of the randomized-exposure response
// estimator; the production path is checked against it for exact equality.
double aer_by_enumeration(const Tensor& scores,
                          const std::vector<LoggedRecord>& records) {
  double total = 0.0;
  for (const LoggedRecord& s : records) {
    for (std::size_t i = 0; i < scores.cols(); ++i) {
      const int choice = policy_choice(scores, static_cast<std::size_t>(s.user_row));
      const double match_policy = choice == static_cast<int>(i) ? 1.0 : 0.0;
      const double match_logged =
          s.item == static_cast<int>(i) ? 1.0 : 0.0;
      total += static_cast<double>(s.label) * match_policy * match_logged;
    }
  }
  return total / static_cast<double>(records.size());
}

}  // namespace

TEST_CASE("recall@1 counts matched positives") {
  // user 0 ranks item 1 first; user 1 ranks item 0 first
  const Tensor scores = Tensor::matrix(2, 2, {0.1, 0.9, 0.8, 0.2});
  {
    const std::vector<LoggedRecord> recs{{0, 1, 1}};
    CHECK(recall_at_1(scores, recs) == 1.0);
  }
  {
    const std::vector<LoggedRecord> recs{{0, 1, 1}, {1, 1, 1}};
    CHECK(recall_at_1(scores, recs) == 0.5);
  }
  {
    const std::vector<LoggedRecord> recs{{0, 0, 0}, {1, 1, 0}};
    CHECK_THROWS_AS(recall_at_1(scores, recs), ConfigError);
  }
}

TEST_CASE("recall@1 of a uniform random scorer matches chance") {
  const std::size_t n_items = 8;
  const std::size_t n_pos = 10000;
  Rng rng(17);
  Tensor scores({n_pos, n_items});
  for (double& v : scores.values) v = rng.uniform();
  std::vector<LoggedRecord> recs;
  for (std::size_t u = 0; u < n_pos; ++u) {
    recs.push_back({static_cast<int>(u),
                    static_cast<int>(rng.uniform_index(n_items)), 1});
  }
  const double r = recall_at_1(scores, recs);
  CHECK(r == doctest::Approx(0.125).epsilon(0.08));  // 0.125 +- 0.01
  CHECK(std::abs(r - 0.125) <= 0.01);
}

TEST_CASE("policy ties break toward the lower item id") {
  const Tensor scores = Tensor::matrix(1, 3, {0.7, 0.7, 0.2});
  CHECK(policy_choice(scores, 0) == 0);
}

TEST_CASE("aer hand case and degenerate cases") {
  // one user per record; per-row argmax either matches the logged item or not
  const Tensor scores = Tensor::matrix(4, 2, {0.9, 0.1,    // picks 0
                                              0.1, 0.9,    // picks 1
                                              0.9, 0.1,    // picks 0
                                              0.9, 0.1});  // picks 0
  const std::vector<LoggedRecord> recs{
      {0, 0, 1},  // y=1, policy matches
      {1, 0, 1},  // y=1, policy differs
      {2, 0, 0},  // y=0, policy matches
      {3, 0, 1},  // y=1, policy matches
  };
  CHECK(average_expected_response(scores, recs) == 0.5);
  CHECK(aer_by_enumeration(scores, recs) == 0.5);

  const std::vector<LoggedRecord> never{{0, 1, 1}, {2, 1, 1}};
  CHECK(average_expected_response(scores, never) == 0.0);
  const std::vector<LoggedRecord> all_zero{{0, 0, 0}, {2, 0, 0}};
  CHECK(average_expected_response(scores, all_zero) == 0.0);
}

TEST_CASE("aer equals brute-force enumeration exactly on random logs") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    Rng rng(seed);
    const std::size_t users = 30;
    const std::size_t items = 6;
    Tensor scores({users, items});
    for (double& v : scores.values) v = rng.uniform();
    std::vector<LoggedRecord> recs;
    for (int r = 0; r < 100; ++r) {
      recs.push_back({static_cast<int>(rng.uniform_index(users)),
                      static_cast<int>(rng.uniform_index(items)),
                      static_cast<int>(rng.uniform_index(2))});
    }
    CHECK(average_expected_response(scores, recs) ==
          aer_by_enumeration(scores, recs));
  }
}

TEST_CASE("recall and aer are invariant under increasing transforms") {
  Rng rng(23);
  const std::size_t users = 50, items = 5;
  Tensor scores({users, items});
  for (double& v : scores.values) v = rng.uniform();
  std::vector<LoggedRecord> recs;
  for (int r = 0; r < 200; ++r) {
    recs.push_back({static_cast<int>(rng.uniform_index(users)),
                    static_cast<int>(rng.uniform_index(items)),
                    static_cast<int>(rng.uniform_index(2))});
  }
  Tensor warped = scores;
  for (double& v : warped.values) v = std::exp(3.0 * v) + 1.0;
  CHECK(recall_at_1(scores, recs) == recall_at_1(warped, recs));
  CHECK(average_expected_response(scores, recs) ==
        average_expected_response(warped, recs));
}

TEST_CASE("auc basics") {
  const std::vector<int> labels{1, 0};
  CHECK(auc(std::vector<double>{0.9, 0.1}, labels) == 1.0);
  CHECK(auc(std::vector<double>{0.1, 0.9}, labels) == 0.0);
  CHECK(auc(std::vector<double>{0.5, 0.5}, labels) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<double>{0.5, 0.6}, std::vector<int>{1, 1}),
                  ConfigError);
}

TEST_CASE("auc is invariant under increasing transforms") {
  Rng rng(29);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(static_cast<int>(rng.uniform_index(2)));
  }
  std::vector<double> warped = scores;
  for (double& v : warped) v = std::atan(8.0 * v - 2.0);
  CHECK(auc(scores, labels) == doctest::Approx(auc(warped, labels)).epsilon(1e-12));
}

TEST_CASE("item-based auc skips single-class items and averages the rest") {
  const std::vector<LoggedRecord> recs{
      {0, 0, 1}, {1, 0, 0}, {2, 0, 1},  // item 0: mixed
      {3, 1, 1}, {4, 1, 1},             // item 1: positives only -> skipped
      {5, 2, 0}, {6, 2, 1},             // item 2: mixed
  };
  const std::vector<double> scores{0.9, 0.1, 0.8, 0.5, 0.6, 0.7, 0.2};
  const ItemAuc ia = item_based_auc(recs, scores);
  CHECK(ia.per_item.size() == 2);
  CHECK(ia.per_item.at(0) == 1.0);
  CHECK(ia.per_item.at(2) == 0.0);
  CHECK(ia.macro == doctest::Approx(0.5));
  REQUIRE(ia.skipped.size() == 1);
  CHECK(ia.skipped[0] == 1);

  const std::vector<LoggedRecord> degenerate{{0, 0, 1}, {1, 0, 1}};
  CHECK_THROWS_AS(item_based_auc(degenerate, std::vector<double>{0.5, 0.6}),
                  ConfigError);
}

TEST_CASE("constant scoring yields one half on every eligible item") {
  Rng rng(31);
  std::vector<LoggedRecord> recs;
  std::vector<double> scores;
  for (int i = 0; i < 300; ++i) {
    recs.push_back({i, static_cast<int>(rng.uniform_index(4)),
                    static_cast<int>(rng.uniform_index(2))});
    scores.push_back(0.25);
  }
  const ItemAuc ia = item_based_auc(recs, scores);
  CHECK(!ia.per_item.empty());
  for (const auto& [item, v] : ia.per_item) {
    CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("silhouette separates tight distant clusters") {
  Rng rng(37);
  const std::size_t per = 60;
  Tensor reps({2 * per, 3});
  std::vector<int> labels(2 * per);
  for (std::size_t i = 0; i < per; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      reps.at(i, c) = rng.normal(0.0, 0.1);
      reps.at(per + i, c) = 10.0 + rng.normal(0.0, 0.1);
    }
    labels[i] = 0;
    labels[per + i] = 1;
  }
  CHECK(silhouette(reps, labels) >= 0.9);
}

TEST_CASE("silhouette conventions: identical points and single cluster") {
  Tensor reps({4, 2});  // all zero
  const std::vector<int> two_labels{0, 0, 1, 1};
  CHECK(silhouette(reps, two_labels) == 0.0);
  const std::vector<int> one_label{0, 0, 0, 0};
  CHECK_THROWS_AS(silhouette(reps, one_label), ConfigError);
}

TEST_CASE("silhouette of random labels on one blob is near zero") {
  Rng rng(41);
  const std::size_t n = 400;
  Tensor reps({n, 2});
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    reps.at(i, 0) = rng.normal();
    reps.at(i, 1) = rng.normal();
    labels[i] = static_cast<int>(rng.uniform_index(2));
  }
  CHECK(std::abs(silhouette(reps, labels)) <= 0.05);
}

TEST_CASE("silhouette subsampling is capped and seeded") {
  Rng rng(43);
  const std::size_t n = 500;
  Tensor reps({n, 2});
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    reps.at(i, 0) = rng.normal();
    reps.at(i, 1) = 5.0 * static_cast<double>(i % 2) + rng.normal(0.0, 0.2);
    labels[i] = static_cast<int>(i % 2);
  }
  const double a = silhouette(reps, labels, 100, 9);
  const double b = silhouette(reps, labels, 100, 9);
  CHECK(a == b);
  CHECK(silhouette(reps, labels, 100, 10) != a);  // different sample
}

TEST_CASE("adjusted rand index: identity, relabeling, nulls, errors") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
  const std::vector<int> renamed{5, 5, 9, 9, 7, 7};
  CHECK(adjusted_rand_index(a, renamed) == doctest::Approx(1.0));

  Rng rng(47);
  std::vector<int> x(10000), y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<int>(rng.uniform_index(4));
    y[i] = static_cast<int>(rng.uniform_index(4));
  }
  CHECK(std::abs(adjusted_rand_index(x, y)) <= 0.02);

  CHECK_THROWS_AS(adjusted_rand_index(a, std::vector<int>{1, 2}), ConfigError);
}

TEST_CASE("tower correlation: copies, negations, independence, errors") {
  Rng rng(53);
  const std::size_t n = 10000;
  Tensor dup({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    dup.at(i, 0) = rng.normal();
    dup.at(i, 1) = dup.at(i, 0);
  }
  CHECK(tower_correlation(dup).at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor neg({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    neg.at(i, 0) = rng.normal();
    neg.at(i, 1) = -neg.at(i, 0);
  }
  CHECK(tower_correlation(neg).at(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));

  Tensor indep({n, 4});
  for (double& v : indep.values) v = rng.normal();
  const Tensor corr = tower_correlation(indep);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(corr.at(i, i) == 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(corr.at(i, j) == doctest::Approx(corr.at(j, i)).epsilon(1e-9));
      if (i != j) CHECK(std::abs(corr.at(i, j)) <= 0.03);
    }
  }

  Tensor flat({10, 2});
  for (std::size_t i = 0; i < 10; ++i) {
    flat.at(i, 0) = rng.normal();
    flat.at(i, 1) = 0.42;
  }
  CHECK_THROWS_WITH_AS(tower_correlation(flat), doctest::Contains("tower 1"),
                       ConfigError);
}
