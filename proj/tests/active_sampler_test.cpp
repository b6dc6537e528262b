/*
 * Copyright 2026 The Clime Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "clime/active_sampler.hpp"
#include "expect_error.hpp"
#include "support.hpp"

namespace clime {
namespace {

using test::make_doc;
using test::throws_error;

double oracle_entropy(double p1) {
  auto term = [](double p) { return p > 0.0 ? -p * std::log(p) : 0.0; };
  return term(p1) + term(1.0 - p1);
}

// One width-1 filter over d=1 with unit weight, so a single-token document
// whose embedding is v >= 0 gets p1 = sigmoid(v).
ClassifierParams sigmoid_model() {
  ClassifierParams p({1}, 1, 1);
  p.values()[p.kernel_offset(0)] = 1.0;
  p.values()[p.output_offset() + 1] = 1.0;
  return p;
}

TEST(Entropy, KnownValues) {
  EXPECT_NEAR(entropy({0.9, 0.1}), 0.325083, 1e-6);
  EXPECT_NEAR(entropy({0.5, 0.5}), std::log(2.0), 1e-15);
  EXPECT_EQ(entropy({1.0, 0.0}), 0.0);
  EXPECT_EQ(entropy({0.0, 1.0}), 0.0);
  EXPECT_TRUE(throws_error([] { entropy({0.7, 0.7}); }, ErrorCode::kInvalidArgument,
                           "not normalized"));
}

TEST(Entropy, PropertySymmetricAndBounded) {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const double h = entropy({1.0 - p, p});
    EXPECT_NEAR(h, oracle_entropy(p), 1e-12);
    EXPECT_NEAR(h, entropy({p, 1.0 - p}), 1e-12);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(2.0) + 1e-15);
  }
}

TEST(Sampling, PicksHighestEntropyDocuments) {
  Matrix e;
  e.append_row(std::vector<double>{0.0});
  e.append_row(std::vector<double>{std::log(9.0)});
  e.append_row(std::vector<double>{std::log(1.5)});
  const auto p = sigmoid_model();
  const std::vector<Document> pool{make_doc("a", {0}), make_doc("b", {1}), make_doc("c", {2})};
  const std::vector<std::pair<std::string, double>> expected{{"a", 0.693}, {"b", 0.325}, {"c", 0.673}};
  for (std::size_t i = 0; i < pool.size(); ++i)
    EXPECT_NEAR(entropy(predict_proba(p, pool[i].tokens, e)), expected[i].second, 1e-3);
  EXPECT_EQ(uncertainty_sample(p, pool, 2, e), (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(uncertainty_sample(p, pool, 1, e), (std::vector<std::string>{"a"}));
  EXPECT_EQ(uncertainty_sample(p, pool, 10, e).size(), 3u);
  EXPECT_TRUE(uncertainty_sample(p, pool, 0, e).empty());
}

TEST(Sampling, TiesByIdAndUnscorableSkipped) {
  Matrix e;
  e.append_row(std::vector<double>{0.0});
  const auto p = sigmoid_model();
  const std::vector<Document> pool{make_doc("z", {0}), make_doc("m", {0}), make_doc("empty", {}),
                                   make_doc("b", {0})};
  EXPECT_EQ(uncertainty_sample(p, pool, 4, e), (std::vector<std::string>{"b", "m", "z"}));
  EXPECT_TRUE(throws_error([&] { uncertainty_sample(p, {}, 2, e); },
                           ErrorCode::kInvalidArgument, "empty pool"));
}

TEST(Sampling, PropertyMatchesSortedEntropies) {
  Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix e = test::random_matrix(15, 3, rng, 1.5);
    auto p = ClassifierParams::initialized({2, 3}, 4, 3, rng.next());
    for (double& v : p.values()) v *= 10.0;
    std::vector<Document> pool;
    for (int i = 0; i < 40; ++i) {
      std::vector<WordId> t(1 + rng.below(8));
      for (auto& w : t) w = static_cast<WordId>(rng.below(15));
      pool.push_back(make_doc("p" + std::to_string(100 + i), t));
    }
    std::vector<std::pair<double, std::string>> all;
    for (const auto& d : pool) all.push_back({-entropy(predict_proba(p, d.tokens, e)), d.id});
    std::sort(all.begin(), all.end());
    const std::size_t n = rng.below(41);
    const auto got = uncertainty_sample(p, pool, n, e);
    ASSERT_EQ(got.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(got[i], all[i].second);
  }
}

TEST(Augment, AppendsSelectedDocuments) {
  std::vector<Document> train;
  for (int i = 0; i < 572; ++i) train.push_back(make_doc("t" + std::to_string(i), {0}, i % 2));
  std::vector<Document> picked;
  for (int i = 0; i < 50; ++i) picked.push_back(make_doc("u" + std::to_string(i), {0}, 1));
  const auto out = augment_training_set(train, picked);
  EXPECT_EQ(out.size(), 622u);
  EXPECT_EQ(out[572].id, "u0");
  EXPECT_EQ(augment_training_set(train, {}).size(), 572u);

  picked[7].id = "t3";
  EXPECT_TRUE(throws_error([&] { augment_training_set(train, picked); }, ErrorCode::kConflict,
                           "duplicate"));
  picked[7].id = "u7";
  picked[8].label.reset();
  EXPECT_TRUE(throws_error([&] { augment_training_set(train, picked); },
                           ErrorCode::kInvalidArgument, "label"));
}

TEST(Budgets, Presets) {
  EXPECT_EQ(SelectionBudget::active().docs, 50u);
  EXPECT_EQ(SelectionBudget::clime().keywords, 50u);
  EXPECT_EQ(SelectionBudget::combined().docs + SelectionBudget::combined().keywords, 50u);
}

}  // namespace
}  // namespace clime
