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

#include "qscorer/engine.hpp"
#include "qscorer/io.hpp"
#include "qscorer/quickscorer.hpp"
#include "random_forest.hpp"

namespace qscorer {
namespace {

Forest stump_forest(std::size_t d = 1, std::int32_t feature = 0) {
  Forest f;
  f.n_features = d;
  Tree t;
  t.nodes.resize(3);
  t.nodes[0].feature = feature;
  t.nodes[0].threshold = 0.5f;
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[1].leaf = t.nodes[2].leaf = true;
  t.nodes[1].values = {1.0};
  t.nodes[2].values = {2.0};
  assign_leaf_indices(t);
  f.trees.push_back(t);
  return f;
}

Tree full_tree(int depth) {
  Tree t;
  const std::size_t internal = (std::size_t{1} << depth) - 1;
  t.nodes.resize(2 * internal + 1);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (i < internal) {
      t.nodes[i].feature = 0;
      t.nodes[i].threshold = static_cast<float>(i);
      t.nodes[i].left = static_cast<std::int32_t>(2 * i + 1);
      t.nodes[i].right = static_cast<std::int32_t>(2 * i + 2);
    } else {
      t.nodes[i].leaf = true;
      t.nodes[i].values = {0.0};
    }
  }
  assign_leaf_indices(t);
  return t;
}

TEST(BuildBitmask, Stump) {
  const auto m = build_bitmask(stump_forest().trees[0], 0);
  EXPECT_EQ(m.byte(0), 0x02);
}

TEST(BuildBitmask, DepthTwoRoot) {
  const auto t = full_tree(2);
  EXPECT_EQ(build_bitmask(t, 0).byte(0), 0x0C);
  EXPECT_EQ(build_bitmask(t, 1).byte(0), 0x0E);
  EXPECT_EQ(build_bitmask(t, 2).byte(0), 0x0B);
  EXPECT_THROW(build_bitmask(t, 3), ArgumentError);
}

// For every input, the AND of the masks of nodes the input passes to the
// right has its lowest set bit at the exit leaf.
TEST(BuildBitmask, Depth3FixtureBruteForce) {
  const auto f = parse_forest(read_text_file(testing::fixture("depth3_forest.json")));
  std::mt19937_64 rng(1);
  const auto x = testing::random_instances(rng, 2000, f.n_features, 16);
  for (const auto& t : f.trees) {
    for (std::size_t i = 0; i < 2000; ++i) {
      std::span<const float> row(x.data() + i * f.n_features, f.n_features);
      auto acc = LeafBitvector::ones(t.n_leaves);
      for (std::size_t n = 0; n < t.nodes.size(); ++n) {
        const auto& node = t.nodes[n];
        if (!node.leaf && row[node.feature] > node.threshold) acc &= build_bitmask(t, n);
      }
      ASSERT_EQ(exit_leaf_index(acc), naive_exit_leaf(t, row, f.comparison));
    }
  }
}

TEST(BuildQsModel, OneStump) {
  const auto m = build_qs_model<float, double>(stump_forest(3));
  EXPECT_EQ(m.feature_offsets, (std::vector<std::uint32_t>{0, 1, 1, 1}));
  EXPECT_EQ(m.triple_count(), 1u);
}

TEST(BuildQsModel, TwoStumpsOnFeaturesZeroAndThree) {
  auto f = stump_forest(4, 0);
  f.trees.push_back(stump_forest(4, 3).trees[0]);
  const auto m = build_qs_model<float, double>(f);
  EXPECT_EQ(m.feature_offsets, (std::vector<std::uint32_t>{0, 1, 1, 1, 2}));
  EXPECT_EQ(m.tree_ids, (std::vector<std::uint32_t>{0, 1}));
}

TEST(BuildQsModel, FixtureTripleCountsPerFeature) {
  const auto f = parse_forest(read_text_file(testing::fixture("depth3_forest.json")));
  const auto m = build_qs_model<float, double>(f);
  std::vector<std::uint32_t> count(f.n_features, 0);
  for (const auto& t : f.trees) {
    for (const auto& n : t.nodes) {
      if (!n.leaf) ++count[static_cast<std::size_t>(n.feature)];
    }
  }
  for (std::size_t k = 0; k < f.n_features; ++k) {
    EXPECT_EQ(m.feature_offsets[k + 1] - m.feature_offsets[k], count[k]);
    for (auto i = m.feature_offsets[k] + 1; i < m.feature_offsets[k + 1]; ++i) {
      EXPECT_LE(m.thresholds[i - 1], m.thresholds[i]);
    }
  }
  EXPECT_EQ(m.triple_count(), f.internal_nodes());
  EXPECT_EQ(m.leafvalues.size(), f.trees.size() * 8);
}

TEST(BuildQsModel, TooManyLeavesUnsupported) {
  std::mt19937_64 rng(2);
  testing::ForestShape shape;
  shape.n_trees = 1;
  shape.max_leaves = 300;
  shape.exact_leaves = true;
  EXPECT_THROW((build_qs_model<float, double>(testing::random_forest(rng, shape))),
               UnsupportedError);
}

TEST(QsScore, StumpTraces) {
  const auto m = build_qs_model<float, double>(stump_forest());
  const float hi[] = {0.7f};
  const float lo[] = {0.3f};
  std::vector<std::uint64_t> leafidx(1);
  qs_compute_leafidx(m, std::span<const float>(hi), std::span<std::uint64_t>(leafidx));
  EXPECT_EQ(leafidx[0], 0b10u);
  EXPECT_EQ(qs_score(m, std::span<const float>(hi)), std::vector<double>{2.0});
  qs_compute_leafidx(m, std::span<const float>(lo), std::span<std::uint64_t>(leafidx));
  EXPECT_EQ(leafidx[0], 0b11u);
  EXPECT_EQ(qs_score(m, std::span<const float>(lo)), std::vector<double>{1.0});
}

TEST(QsScore, RejectsNonFinite) {
  const auto m = build_qs_model<float, double>(stump_forest());
  const float x[] = {std::numeric_limits<float>::infinity()};
  EXPECT_THROW(qs_score(m, std::span<const float>(x)), ArgumentError);
}

class QsRandom : public ::testing::TestWithParam<std::tuple<std::size_t, Comparison>> {};

TEST_P(QsRandom, ExitLeavesMatchNaive) {
  const auto [max_leaves, cmp] = GetParam();
  std::mt19937_64 rng(max_leaves * 7 + static_cast<int>(cmp));
  testing::ForestShape shape;
  shape.n_trees = 32;
  shape.max_leaves = max_leaves;
  shape.n_features = 8;
  shape.n_classes = 3;
  shape.comparison = cmp;
  const auto f = testing::random_forest(rng, shape);
  const auto m = build_qs_model<float, double>(f);
  const auto x = testing::random_instances(rng, 1000, shape.n_features);
  QSScratch scratch;
  std::vector<std::uint16_t> leaves(f.trees.size());
  std::vector<std::uint64_t> brk(m.initial_leafidx.size()), full(m.initial_leafidx.size());
  for (std::size_t i = 0; i < 1000; ++i) {
    std::span<const float> row(x.data() + i * shape.n_features, shape.n_features);
    qs_exit_leaves(m, row, std::span<std::uint16_t>(leaves), scratch);
    for (std::size_t h = 0; h < f.trees.size(); ++h) {
      ASSERT_EQ(leaves[h], naive_exit_leaf(f.trees[h], row, cmp)) << "instance " << i << " tree " << h;
    }
    EXPECT_EQ(qs_score(m, row), naive_score(f, row));
    qs_compute_leafidx(m, row, std::span<std::uint64_t>(brk), ScanMode::kBreak);
    qs_compute_leafidx(m, row, std::span<std::uint64_t>(full), ScanMode::kFull);
    ASSERT_EQ(brk, full);
  }
}

INSTANTIATE_TEST_SUITE_P(Shapes, QsRandom,
                         ::testing::Combine(::testing::Values(2, 8, 64, 65, 200, 256),
                                            ::testing::Values(Comparison::kLeq, Comparison::kLt)),
                         [](const auto& info) {
                           return "L" + std::to_string(std::get<0>(info.param)) +
                                  (std::get<1>(info.param) == Comparison::kLt ? "_lt" : "_leq");
                         });

TEST(QsScore, PopcountNeverIncreasesAndNeverEmpties) {
  std::mt19937_64 rng(3);
  testing::ForestShape shape;
  shape.max_leaves = 64;
  const auto f = testing::random_forest(rng, shape);
  const auto m = build_qs_model<float, double>(f);
  const auto x = testing::random_instances(rng, 200, shape.n_features);
  for (std::size_t i = 0; i < 200; ++i) {
    const float* row = x.data() + i * shape.n_features;
    std::vector<std::uint64_t> leafidx = m.initial_leafidx;
    for (std::size_t k = 0; k < m.n_features; ++k) {
      for (auto t = m.feature_offsets[k]; t < m.feature_offsets[k + 1]; ++t) {
        if (!(row[k] > m.thresholds[t])) break;
        auto& word = leafidx[m.tree_ids[t]];
        const auto before = std::popcount(word);
        word &= m.bitmasks[m.mask_slots[t]];
        EXPECT_LE(std::popcount(word), before);
        EXPECT_NE(word, 0u);
      }
    }
  }
}

TEST(QsScoreBlock, InstanceMajorLayout) {
  std::mt19937_64 rng(4);
  testing::ForestShape shape;
  shape.n_classes = 3;
  const auto f = testing::random_forest(rng, shape);
  const auto m = build_qs_model<float, double>(f);
  const auto x = testing::random_instances(rng, 10, shape.n_features);
  std::vector<double> out(30);
  QSScratch scratch;
  qs_score_block(m, std::span<const float>(x), std::span<double>(out), scratch);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto s = naive_score(f, std::span<const float>(x.data() + i * 5, 5));
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out[i * 3 + c], s[c]);
  }
}

TEST(QsScore, QuantizedMatchesQuantizedWalk) {
  std::mt19937_64 rng(5);
  testing::ForestShape shape;
  shape.max_leaves = 32;
  shape.n_classes = 3;
  const auto f = testing::random_forest(rng, shape);
  const QuantizationSpec spec{1 << 15, 16, true, true};
  const auto q = std::get<QForestSplitsLeaves>(quantize_forest(f, spec).model);
  const auto q16 = convert_forest<std::int16_t, std::int32_t>(q);
  const auto m = build_qs_model<std::int16_t, std::int32_t>(q16, spec);
  const auto x = testing::random_instances(rng, 500, shape.n_features);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto xi = quantize_instance(std::span<const float>(x.data() + i * 5, 5), spec.scale, 16);
    std::vector<std::int16_t> x16(xi.begin(), xi.end());
    EXPECT_EQ(qs_score(m, std::span<const std::int16_t>(x16)),
              naive_score(q16, std::span<const std::int16_t>(x16)));
  }
}

}  // namespace
}  // namespace qscorer
