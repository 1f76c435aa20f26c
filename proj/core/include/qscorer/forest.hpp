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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qscorer/errors.hpp"
#include "qscorer/numeric.hpp"

namespace qscorer {

// Side taken on a split: kLeq sends x to the left child when x <= threshold
// (scikit-learn), kLt when x < threshold (XGBoost).
enum class Comparison : std::uint8_t { kLeq, kLt };

enum class Task : std::uint8_t { kRanking, kClassification };

inline constexpr std::size_t kMaxLeaves = 256;

template <class T>
constexpr bool goes_left(T x, T threshold, Comparison cmp) noexcept {
  return cmp == Comparison::kLeq ? !(x > threshold) : x < threshold;
}

template <class T, class V>
struct BasicNode {
  bool leaf = false;
  // Internal nodes.
  std::int32_t feature = -1;
  T threshold{};
  std::int32_t left = -1;
  std::int32_t right = -1;
  // Leaves. leaf_index is the in-order position among the tree's leaves.
  std::int32_t leaf_index = -1;
  std::vector<V> values;
};

template <class T, class V>
struct BasicTree {
  std::vector<BasicNode<T, V>> nodes;  // nodes[0] is the root
  std::size_t n_leaves = 0;

  std::size_t internal_count() const noexcept { return nodes.size() - n_leaves; }
};

template <class T, class V>
struct BasicForest {
  using threshold_type = T;
  using leaf_type = V;

  std::vector<BasicTree<T, V>> trees;
  std::size_t n_features = 0;
  std::size_t n_classes = 1;
  Comparison comparison = Comparison::kLeq;
  Task task = Task::kRanking;

  std::size_t max_leaves() const noexcept {
    std::size_t l = 0;
    for (const auto& t : trees) l = t.n_leaves > l ? t.n_leaves : l;
    return l;
  }
  std::size_t internal_nodes() const noexcept {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.internal_count();
    return n;
  }
};

// Thresholds and features are 32-bit floats; leaf values are doubles so that
// weight folding and JSON round trips stay exact.
using Forest = BasicForest<float, double>;
using Tree = BasicTree<float, double>;
using Node = BasicNode<float, double>;

enum class Severity : std::uint8_t { kWarning, kError };

struct ValidationIssue {
  Severity severity = Severity::kError;
  std::string message;
  std::ptrdiff_t tree = -1;
  std::ptrdiff_t node = -1;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  void add(Severity severity, std::string message, std::ptrdiff_t tree = -1,
           std::ptrdiff_t node = -1);
  // Message of the first error, formatted with its location.
  std::string first_error() const;
};

namespace detail {

// Walks the tree from the root, left child first. Returns false on an
// out-of-range child, a revisited node (cycle or shared child) or when the
// traversal exceeds the node count.
template <class T, class V, class Visit>
bool walk_in_order(const BasicTree<T, V>& tree, Visit&& visit, std::string* why) {
  const auto n = static_cast<std::int64_t>(tree.nodes.size());
  if (n == 0) {
    if (why) *why = "tree has no nodes";
    return false;
  }
  std::vector<std::uint8_t> seen(tree.nodes.size(), 0);
  std::vector<std::int32_t> stack{0};
  seen[0] = 1;
  // Explicit stack of pending right subtrees gives in-order leaf numbering.
  while (!stack.empty()) {
    std::int32_t id = stack.back();
    stack.pop_back();
    while (true) {
      const auto& node = tree.nodes[static_cast<std::size_t>(id)];
      visit(id, node);
      if (node.leaf) break;
      for (std::int32_t child : {node.left, node.right}) {
        if (child < 0 || child >= n) {
          if (why) *why = "node " + std::to_string(id) + " has child index " +
                          std::to_string(child) + " out of range";
          return false;
        }
        if (child == id || seen[static_cast<std::size_t>(child)]) {
          if (why) *why = "node " + std::to_string(id) + " creates a cycle via child " +
                          std::to_string(child);
          return false;
        }
        seen[static_cast<std::size_t>(child)] = 1;
      }
      stack.push_back(node.right);
      id = node.left;
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      if (why) *why = "node " + std::to_string(i) + " is unreachable from the root";
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Numbers the leaves 0..L-1 in left-to-right order and sets n_leaves.
// Throws ValidationError when the node graph is not a tree rooted at 0.
template <class T, class V>
void assign_leaf_indices(BasicTree<T, V>& tree) {
  std::vector<std::int32_t> order;
  std::string why;
  const bool ok = detail::walk_in_order(
      tree, [&](std::int32_t id, const BasicNode<T, V>& node) {
        if (node.leaf) order.push_back(id);
      },
      &why);
  if (!ok) throw ValidationError(why);
  for (std::size_t i = 0; i < order.size(); ++i) {
    tree.nodes[static_cast<std::size_t>(order[i])].leaf_index = static_cast<std::int32_t>(i);
  }
  for (auto& node : tree.nodes) {
    if (!node.leaf) node.leaf_index = -1;
  }
  tree.n_leaves = order.size();
}

template <class T, class V>
ValidationReport validate(const BasicForest<T, V>& forest) {
  ValidationReport report;
  if (forest.trees.empty()) report.add(Severity::kError, "forest has no trees");
  if (forest.n_features == 0) report.add(Severity::kError, "n_features must be positive");
  if (forest.n_classes == 0) report.add(Severity::kError, "n_classes must be positive");
  if (forest.task == Task::kRanking && forest.n_classes != 1) {
    report.add(Severity::kError, "ranking models must have n_classes = 1");
  }

  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& tree = forest.trees[t];
    const auto ti = static_cast<std::ptrdiff_t>(t);
    std::string why;
    std::size_t leaves = 0;
    std::vector<std::int32_t> in_order;
    const bool shape_ok = detail::walk_in_order(
        tree, [&](std::int32_t id, const BasicNode<T, V>& node) {
          if (node.leaf) {
            ++leaves;
            in_order.push_back(id);
          }
        },
        &why);
    if (!shape_ok) {
      report.add(Severity::kError, why, ti);
      continue;
    }
    if (leaves > kMaxLeaves) {
      report.add(Severity::kError,
                 "L exceeds 256 (tree has " + std::to_string(leaves) + " leaves)", ti);
    }
    if (leaves != tree.n_leaves) {
      report.add(Severity::kError, "n_leaves does not match the number of leaves", ti);
    }
    for (std::size_t i = 0; i < in_order.size(); ++i) {
      const auto& node = tree.nodes[static_cast<std::size_t>(in_order[i])];
      if (node.leaf_index != static_cast<std::int32_t>(i)) {
        report.add(Severity::kError, "leaf index is not its in-order position", ti,
                   in_order[i]);
      }
    }
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const auto& node = tree.nodes[n];
      const auto ni = static_cast<std::ptrdiff_t>(n);
      if (node.leaf) {
        if (node.values.size() != forest.n_classes) {
          report.add(Severity::kError,
                     "leaf carries " + std::to_string(node.values.size()) +
                         " values, expected " + std::to_string(forest.n_classes),
                     ti, ni);
        }
        for (const V& v : node.values) {
          if (!is_finite_value(v)) {
            report.add(Severity::kError, "leaf value is not finite", ti, ni);
            break;
          }
        }
      } else {
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= forest.n_features) {
          report.add(Severity::kError,
                     "feature index " + std::to_string(node.feature) + " out of range", ti,
                     ni);
        }
        if (!is_finite_value(node.threshold)) {
          report.add(Severity::kError, "threshold is not finite", ti, ni);
        }
      }
    }
  }
  return report;
}

// Root-to-leaf descent; the reference every scorer is checked against.
template <class T, class V>
std::size_t naive_exit_leaf(const BasicTree<T, V>& tree, std::span<const T> instance,
                            Comparison cmp) {
  std::size_t id = 0;
  for (std::size_t steps = 0; steps <= tree.nodes.size(); ++steps) {
    const auto& node = tree.nodes[id];
    if (node.leaf) return static_cast<std::size_t>(node.leaf_index);
    const auto k = static_cast<std::size_t>(node.feature);
    if (k >= instance.size()) throw ArgumentError("instance has too few features");
    const T x = instance[k];
    if (!is_finite_value(x)) {
      throw ArgumentError("feature " + std::to_string(k) + " is not finite");
    }
    id = static_cast<std::size_t>(goes_left(x, node.threshold, cmp) ? node.left : node.right);
  }
  throw InvariantError("descent did not terminate");
}

template <class T, class V>
const BasicNode<T, V>& leaf_node(const BasicTree<T, V>& tree, std::size_t leaf_index) {
  for (const auto& node : tree.nodes) {
    if (node.leaf && static_cast<std::size_t>(node.leaf_index) == leaf_index) return node;
  }
  throw InvariantError("leaf index not found");
}

// Sum over trees, in tree order, of the exit leaf's value vector.
template <class T, class V>
std::vector<accum_t<V>> naive_score(const BasicForest<T, V>& forest,
                                    std::span<const T> instance) {
  if (instance.size() != forest.n_features) {
    throw ArgumentError("instance has " + std::to_string(instance.size()) +
                        " features, model expects " + std::to_string(forest.n_features));
  }
  std::vector<accum_t<V>> score(forest.n_classes, accum_t<V>{0});
  for (const auto& tree : forest.trees) {
    const std::size_t leaf = naive_exit_leaf(tree, instance, forest.comparison);
    const auto& values = leaf_node(tree, leaf).values;
    for (std::size_t c = 0; c < forest.n_classes; ++c) {
      score[c] += static_cast<accum_t<V>>(values[c]);
    }
  }
  return score;
}

// Multiplies every leaf value of tree i by weights[i].
Forest fold_weights(const Forest& forest, std::span<const double> weights);

// Element-type conversion of a whole forest, e.g. int32 thresholds to int16
// storage. Throws OverflowError if a value does not fit.
template <class T2, class V2, class T, class V>
BasicForest<T2, V2> convert_forest(const BasicForest<T, V>& src) {
  BasicForest<T2, V2> out;
  out.n_features = src.n_features;
  out.n_classes = src.n_classes;
  out.comparison = src.comparison;
  out.task = src.task;
  out.trees.reserve(src.trees.size());
  for (const auto& tree : src.trees) {
    BasicTree<T2, V2> t;
    t.n_leaves = tree.n_leaves;
    t.nodes.reserve(tree.nodes.size());
    for (const auto& node : tree.nodes) {
      BasicNode<T2, V2> n;
      n.leaf = node.leaf;
      n.feature = node.feature;
      n.threshold = node.leaf ? T2{} : checked_cast<T2>(node.threshold);
      n.left = node.left;
      n.right = node.right;
      n.leaf_index = node.leaf_index;
      n.values.reserve(node.values.size());
      for (const V& v : node.values) n.values.push_back(checked_cast<V2>(v));
      t.nodes.push_back(std::move(n));
    }
    out.trees.push_back(std::move(t));
  }
  return out;
}

}  // namespace qscorer
