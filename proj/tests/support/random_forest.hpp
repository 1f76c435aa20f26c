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

#pragma once

// Random forests and instances for property tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qscorer/forest.hpp"

namespace qscorer::testing {

inline std::string fixture(const std::string& name) {
  return std::string(QSCORER_FIXTURE_DIR) + "/" + name;
}

struct ForestShape {
  std::size_t n_trees = 8;
  std::size_t max_leaves = 16;   // each tree gets 2..max_leaves leaves
  std::size_t n_features = 5;
  std::size_t n_classes = 1;
  Comparison comparison = Comparison::kLeq;
  // Thresholds come from a grid of this many points in [-1, 1), so equal
  // (feature, threshold) pairs recur across trees.
  int grid = 64;
  bool exact_leaves = false;  // tree gets exactly max_leaves leaves
};

inline float grid_value(std::mt19937_64& rng, int grid) {
  std::uniform_int_distribution<int> pick(0, grid - 1);
  return -1.0f + 2.0f * static_cast<float>(pick(rng)) / static_cast<float>(grid);
}

// Random binary shape: repeatedly split a random leaf.
inline Tree random_tree(std::mt19937_64& rng, const ForestShape& s, std::size_t leaves) {
  Tree t;
  t.nodes.push_back({});
  t.nodes[0].leaf = true;
  std::vector<std::int32_t> open{0};
  std::uniform_int_distribution<std::size_t> feature(0, s.n_features - 1);
  std::uniform_real_distribution<double> value(-0.999, 0.999);
  while (open.size() < leaves) {
    std::uniform_int_distribution<std::size_t> which(0, open.size() - 1);
    const std::size_t w = which(rng);
    const std::int32_t id = open[w];
    const auto l = static_cast<std::int32_t>(t.nodes.size());
    t.nodes.push_back({});
    t.nodes.push_back({});
    t.nodes[l].leaf = t.nodes[l + 1].leaf = true;
    auto& n = t.nodes[static_cast<std::size_t>(id)];
    n.leaf = false;
    n.feature = static_cast<std::int32_t>(feature(rng));
    n.threshold = grid_value(rng, s.grid);
    n.left = l;
    n.right = l + 1;
    open[w] = l;
    open.push_back(l + 1);
  }
  for (auto& n : t.nodes) {
    if (!n.leaf) continue;
    n.values.resize(s.n_classes);
    for (auto& v : n.values) v = value(rng);
  }
  t.n_leaves = leaves;
  assign_leaf_indices(t);
  return t;
}

inline Forest random_forest(std::mt19937_64& rng, const ForestShape& s) {
  Forest f;
  f.n_features = s.n_features;
  f.n_classes = s.n_classes;
  f.comparison = s.comparison;
  f.task = s.n_classes == 1 ? Task::kRanking : Task::kClassification;
  std::uniform_int_distribution<std::size_t> leaves(2, s.max_leaves);
  for (std::size_t h = 0; h < s.n_trees; ++h) {
    f.trees.push_back(random_tree(rng, s, s.exact_leaves ? s.max_leaves : leaves(rng)));
  }
  return f;
}

// n x d instances in [-1, 1); about a third of the values sit exactly on a
// grid threshold so boundary comparisons get exercised.
inline std::vector<float> random_instances(std::mt19937_64& rng, std::size_t n, std::size_t d,
                                           int grid = 64) {
  std::vector<float> x(n * d);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::bernoulli_distribution on_grid(0.33);
  for (auto& v : x) {
    v = on_grid(rng) ? grid_value(rng, grid) : u(rng);
    if (v >= 1.0f) v = std::nextafter(1.0f, 0.0f);
  }
  return x;
}

}  // namespace qscorer::testing
