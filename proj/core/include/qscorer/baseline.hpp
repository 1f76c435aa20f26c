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

// Reference baselines:
//  - IE: branching descent over the node objects, standing in for generated
//    nested if-else code.
//  - NA: iterative traversal of a contiguous array of node records.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qscorer/forest.hpp"

namespace qscorer {

namespace detail {

template <bool kStrict, class T, class V>
const BasicNode<T, V>& ie_descend(const BasicTree<T, V>& tree, const BasicNode<T, V>& node,
                                  const T* x) {
  if (node.leaf) return node;
  const T xk = x[node.feature];
  bool left;
  if constexpr (kStrict) {
    left = xk < node.threshold;
  } else {
    left = xk <= node.threshold;
  }
  if (left) return ie_descend<kStrict>(tree, tree.nodes[static_cast<std::size_t>(node.left)], x);
  return ie_descend<kStrict>(tree, tree.nodes[static_cast<std::size_t>(node.right)], x);
}

template <class T, class V>
const BasicNode<T, V>& ie_leaf(const BasicForest<T, V>& forest, std::size_t h, const T* x) {
  const auto& tree = forest.trees[h];
  return forest.comparison == Comparison::kLt ? ie_descend<true>(tree, tree.nodes[0], x)
                                              : ie_descend<false>(tree, tree.nodes[0], x);
}

template <class T>
void check_dense(std::span<const T> x, std::size_t d) {
  if (x.size() != d) {
    throw ArgumentError("instance has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(d));
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (!is_finite_value(x[k])) throw ArgumentError("feature " + std::to_string(k) + " is not finite");
  }
}

}  // namespace detail

template <class T, class V>
void ie_exit_leaves(const BasicForest<T, V>& forest, std::span<const T> x,
                    std::span<std::uint16_t> out) {
  detail::check_dense(x, forest.n_features);
  if (out.size() != forest.trees.size()) throw ArgumentError("exit-leaf buffer must hold one per tree");
  for (std::size_t h = 0; h < forest.trees.size(); ++h) {
    out[h] = static_cast<std::uint16_t>(detail::ie_leaf(forest, h, x.data()).leaf_index);
  }
}

template <class T, class V>
void ie_score_into(const BasicForest<T, V>& forest, std::span<const T> x,
                   std::span<accum_t<V>> out) {
  detail::check_dense(x, forest.n_features);
  if (out.size() != forest.n_classes) throw ArgumentError("score buffer must hold C values");
  std::fill(out.begin(), out.end(), accum_t<V>{0});
  for (std::size_t h = 0; h < forest.trees.size(); ++h) {
    const auto& values = detail::ie_leaf(forest, h, x.data()).values;
    for (std::size_t c = 0; c < forest.n_classes; ++c) out[c] += static_cast<accum_t<V>>(values[c]);
  }
}

template <class T, class V>
std::vector<accum_t<V>> ie_score(const BasicForest<T, V>& forest, std::span<const T> x) {
  std::vector<accum_t<V>> out(forest.n_classes);
  ie_score_into(forest, x, std::span<accum_t<V>>(out));
  return out;
}

template <class T>
struct NativeRecord {
  std::int32_t feature = -1;
  T threshold{};
  std::uint32_t left = 0;   // absolute record offsets
  std::uint32_t right = 0;
  std::uint8_t leaf = 0;
  std::uint16_t leaf_slot = 0;
};

// Trees stored back to back in preorder. Leaf values live at
// (h * L + slot) * C + c as in the QuickScorer table.
template <class T, class V>
struct NativeLayout {
  std::size_t n_features = 0;
  std::size_t n_classes = 1;
  std::size_t max_leaves = 0;
  Comparison comparison = Comparison::kLeq;
  std::vector<std::uint32_t> roots;
  std::vector<NativeRecord<T>> records;
  std::vector<V> leafvalues;

  std::size_t n_trees() const noexcept { return roots.size(); }
};

template <class T, class V>
NativeLayout<T, V> build_native(const BasicForest<T, V>& forest) {
  NativeLayout<T, V> out;
  out.n_features = forest.n_features;
  out.n_classes = forest.n_classes;
  out.max_leaves = forest.max_leaves();
  out.comparison = forest.comparison;
  out.leafvalues.assign(forest.trees.size() * out.max_leaves * out.n_classes, V{0});
  for (std::size_t h = 0; h < forest.trees.size(); ++h) {
    const auto& tree = forest.trees[h];
    out.roots.push_back(static_cast<std::uint32_t>(out.records.size()));
    // Preorder copy; each stack item remembers the parent slot it fills.
    struct Item {
      std::size_t node;
      std::size_t parent;
      bool is_left;
    };
    std::vector<Item> stack{{0, SIZE_MAX, false}};
    std::size_t leaves = 0;
    while (!stack.empty()) {
      const Item it = stack.back();
      stack.pop_back();
      const auto& node = tree.nodes.at(it.node);
      const auto offset = static_cast<std::uint32_t>(out.records.size());
      if (it.parent != SIZE_MAX) {
        (it.is_left ? out.records[it.parent].left : out.records[it.parent].right) = offset;
      }
      NativeRecord<T> r;
      if (node.leaf) {
        r.leaf = 1;
        r.leaf_slot = static_cast<std::uint16_t>(node.leaf_index);
        const std::size_t base = (h * out.max_leaves + r.leaf_slot) * out.n_classes;
        for (std::size_t c = 0; c < out.n_classes; ++c) out.leafvalues[base + c] = node.values.at(c);
        ++leaves;
      } else {
        r.feature = node.feature;
        r.threshold = node.threshold;
        stack.push_back({static_cast<std::size_t>(node.right), offset, false});
        stack.push_back({static_cast<std::size_t>(node.left), offset, true});
      }
      out.records.push_back(r);
    }
    if (leaves != tree.n_leaves) throw InvariantError("native layout leaf count mismatch");
  }
  return out;
}

namespace detail {

template <bool kStrict, class T, class V>
std::size_t na_leaf(const NativeLayout<T, V>& layout, std::size_t h, const T* x) noexcept {
  const NativeRecord<T>* rec = layout.records.data();
  std::uint32_t i = layout.roots[h];
  while (!rec[i].leaf) {
    const T xk = x[rec[i].feature];
    bool left;
    if constexpr (kStrict) {
      left = xk < rec[i].threshold;
    } else {
      left = xk <= rec[i].threshold;
    }
    i = left ? rec[i].left : rec[i].right;
  }
  return rec[i].leaf_slot;
}

template <class T, class V>
std::size_t na_leaf(const NativeLayout<T, V>& layout, std::size_t h, const T* x) noexcept {
  return layout.comparison == Comparison::kLt ? na_leaf<true>(layout, h, x)
                                              : na_leaf<false>(layout, h, x);
}

}  // namespace detail

template <class T, class V>
void na_exit_leaves(const NativeLayout<T, V>& layout, std::span<const T> x,
                    std::span<std::uint16_t> out) {
  detail::check_dense(x, layout.n_features);
  if (out.size() != layout.n_trees()) throw ArgumentError("exit-leaf buffer must hold one per tree");
  for (std::size_t h = 0; h < layout.n_trees(); ++h) {
    out[h] = static_cast<std::uint16_t>(detail::na_leaf(layout, h, x.data()));
  }
}

template <class T, class V>
void na_score_into(const NativeLayout<T, V>& layout, std::span<const T> x,
                   std::span<accum_t<V>> out) {
  detail::check_dense(x, layout.n_features);
  if (out.size() != layout.n_classes) throw ArgumentError("score buffer must hold C values");
  std::fill(out.begin(), out.end(), accum_t<V>{0});
  const std::size_t C = layout.n_classes;
  const std::size_t stride = layout.max_leaves * C;
  const bool strict = layout.comparison == Comparison::kLt;
  for (std::size_t h = 0; h < layout.n_trees(); ++h) {
    const std::size_t j = strict ? detail::na_leaf<true>(layout, h, x.data())
                                 : detail::na_leaf<false>(layout, h, x.data());
    const V* values = layout.leafvalues.data() + h * stride + j * C;
    for (std::size_t c = 0; c < C; ++c) out[c] += static_cast<accum_t<V>>(values[c]);
  }
}

template <class T, class V>
std::vector<accum_t<V>> na_score(const NativeLayout<T, V>& layout, std::span<const T> x) {
  std::vector<accum_t<V>> out(layout.n_classes);
  na_score_into(layout, x, std::span<accum_t<V>>(out));
  return out;
}

}  // namespace qscorer
