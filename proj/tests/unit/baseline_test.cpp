// Copyright 2026 The qscorer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "qscorer/baseline.hpp"
#include "qscorer/io.hpp"
#include "qscorer/quantize.hpp"
#include "random_forest.hpp"

namespace qscorer {
namespace {

const char* kStump = R"({"n_features": 1, "n_classes": 1, "comparison": "leq",
  "task": "ranking", "weights": null, "trees": [{"nodes": [
    {"id": 0, "feature": 0, "threshold": 0.5, "left": 1, "right": 2},
    {"id": 1, "leaf": [1.0]}, {"id": 2, "leaf": [2.0]}]}]})";

TEST(BuildNative, StumpHasThreeRecords) {
  const auto layout = build_native(parse_forest(kStump));
  ASSERT_EQ(layout.records.size(), 3u);
  EXPECT_FALSE(layout.records[0].leaf);
  EXPECT_TRUE(layout.records[1].leaf);
  EXPECT_TRUE(layout.records[2].leaf);
  EXPECT_EQ(layout.records[0].left, 1u);
  EXPECT_EQ(layout.records[0].right, 2u);
}

TEST(IeScore, Stump) {
  const auto f = parse_forest(kStump);
  const float x[] = {0.3f};
  EXPECT_EQ(ie_score(f, std::span<const float>(x)), std::vector<double>{1.0});
  EXPECT_EQ(na_score(build_native(f), std::span<const float>(x)), std::vector<double>{1.0});
}

TEST(Baselines, FixtureMatchesNaive) {
  const auto f = parse_forest(read_text_file(testing::fixture("depth3_forest.json")));
  const auto layout = build_native(f);
  std::mt19937_64 rng(1);
  const auto x = testing::random_instances(rng, 100, f.n_features, 16);
  for (std::size_t i = 0; i < 100; ++i) {
    std::span<const float> row(x.data() + i * f.n_features, f.n_features);
    EXPECT_EQ(na_score(layout, row), naive_score(f, row));
    EXPECT_EQ(ie_score(f, row), naive_score(f, row));
  }
}

TEST(Baselines, ThousandTreesMatchNaive) {
  std::mt19937_64 rng(2);
  testing::ForestShape shape;
  shape.n_trees = 1000;
  shape.max_leaves = 32;
  shape.n_features = 10;
  const auto f = testing::random_forest(rng, shape);
  const auto layout = build_native(f);
  const auto x = testing::random_instances(rng, 1000, shape.n_features);
  std::vector<std::uint16_t> a(f.trees.size()), b(f.trees.size());
  for (std::size_t i = 0; i < 1000; ++i) {
    std::span<const float> row(x.data() + i * shape.n_features, shape.n_features);
    const auto ref = naive_score(f, row);
    const auto ie = ie_score(f, row);
    const auto na = na_score(layout, row);
    EXPECT_NEAR(ie[0], ref[0], 1e-6 * std::max(1e-300, std::fabs(ref[0])));
    EXPECT_NEAR(na[0], ref[0], 1e-6 * std::max(1e-300, std::fabs(ref[0])));
    ie_exit_leaves(f, row, std::span<std::uint16_t>(a));
    na_exit_leaves(layout, row, std::span<std::uint16_t>(b));
    for (std::size_t h = 0; h < f.trees.size(); ++h) {
      ASSERT_EQ(a[h], naive_exit_leaf(f.trees[h], row, f.comparison));
      ASSERT_EQ(b[h], a[h]);
    }
  }
}

TEST(Baselines, QuantizedBitIdentical) {
  std::mt19937_64 rng(3);
  testing::ForestShape shape;
  shape.max_leaves = 64;
  shape.n_classes = 3;
  shape.comparison = Comparison::kLt;
  const QuantizationSpec spec{1 << 15, 16, true, true};
  const auto q = std::get<QForestSplitsLeaves>(
      quantize_forest(testing::random_forest(rng, shape), spec).model);
  const auto layout = build_native(q);
  const auto x = testing::random_instances(rng, 500, shape.n_features);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto xq = quantize_instance(std::span<const float>(x.data() + i * 5, 5), spec.scale, 16);
    std::span<const std::int32_t> row(xq);
    EXPECT_EQ(ie_score(q, row), naive_score(q, row));
    EXPECT_EQ(na_score(layout, row), naive_score(q, row));
  }
}

TEST(Baselines, RejectBadInstances) {
  const auto f = parse_forest(kStump);
  const float nan[] = {std::numeric_limits<float>::quiet_NaN()};
  const float two[] = {0.0f, 1.0f};
  EXPECT_THROW(ie_score(f, std::span<const float>(nan)), ArgumentError);
  EXPECT_THROW(na_score(build_native(f), std::span<const float>(two)), ArgumentError);
}

}  // namespace
}  // namespace qscorer
