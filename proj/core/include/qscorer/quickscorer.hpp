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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "qscorer/bitvector.hpp"
#include "qscorer/forest.hpp"
#include "qscorer/quantize.hpp"

namespace qscorer {

// Mask computation either stops at the first non-triggering triple of a
// feature (the algorithm as published) or scans every triple. Both must
// produce the same leaf bitvectors; kFull exists to test that.
enum class ScanMode : std::uint8_t { kBreak, kFull };

// Compiled QuickScorer model.
//
// Triples (threshold, tree, slot) are grouped by feature and sorted by
// threshold, ties by (tree, node). The bitmask of triple i lives at slot
// mask_slots[i]; slots are assigned in sorted order so the scan reads
// bitmasks sequentially. Leaf values are stored at (h * L + j) * C + c.
template <FeatureType F, LeafType V>
struct QSModel {
  using feature_type = F;
  using leaf_type = V;
  using accum_type = accum_t<V>;

  std::size_t n_features = 0;
  std::size_t n_trees = 0;
  std::size_t n_classes = 1;
  std::size_t max_leaves = 0;  // L
  std::size_t words = 1;       // 64-bit words per leaf bitvector
  Comparison comparison = Comparison::kLeq;
  std::optional<QuantizationSpec> quantization;

  std::vector<std::uint32_t> feature_offsets;  // n_features + 1
  std::vector<F> thresholds;
  std::vector<std::uint32_t> tree_ids;
  std::vector<std::uint32_t> mask_slots;
  std::vector<std::uint64_t> bitmasks;         // slot-major, `words` per slot
  std::vector<std::uint64_t> initial_leafidx;  // tree-major, ones at existing leaves
  std::vector<std::uint16_t> tree_leaves;
  std::vector<V> leafvalues;

  std::size_t triple_count() const noexcept { return thresholds.size(); }
};

// Bit j is clear iff leaf j lies in the left subtree of `node`; the other
// bits below L are set.
template <class T, class V>
LeafBitvector build_bitmask(const BasicTree<T, V>& tree, std::size_t node) {
  if (node >= tree.nodes.size() || tree.nodes[node].leaf) {
    throw ArgumentError("build_bitmask needs an internal node");
  }
  LeafBitvector mask = LeafBitvector::ones(tree.n_leaves);
  std::vector<std::int32_t> stack{tree.nodes[node].left};
  while (!stack.empty()) {
    const auto& n = tree.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (n.leaf) {
      if (n.leaf_index < 0 || static_cast<std::size_t>(n.leaf_index) >= tree.n_leaves) {
        throw InvariantError("leaf index out of range while building bitmask");
      }
      mask.reset(static_cast<std::size_t>(n.leaf_index));
    } else {
      stack.push_back(n.left);
      stack.push_back(n.right);
    }
  }
  return mask;
}

// Compiles a forest for QuickScorer and its lane-parallel variants. Element
// types are converted with range checks (e.g. int32 quantized thresholds to
// int16 storage).
template <FeatureType F, LeafType V, class T, class U>
QSModel<F, V> build_qs_model(const BasicForest<T, U>& forest,
                             std::optional<QuantizationSpec> quantization = std::nullopt) {
  QSModel<F, V> m;
  m.n_features = forest.n_features;
  m.n_trees = forest.trees.size();
  m.n_classes = forest.n_classes;
  m.comparison = forest.comparison;
  m.quantization = quantization;
  m.max_leaves = forest.max_leaves();
  if (m.max_leaves > kMaxLeaves) {
    throw UnsupportedError("QuickScorer supports at most 256 leaves per tree, got " +
                           std::to_string(m.max_leaves));
  }
  if (m.n_trees == 0 || m.max_leaves == 0) throw ArgumentError("empty forest");
  m.words = (m.max_leaves + 63) / 64;

  struct Pending {
    std::uint32_t feature;
    F threshold;
    std::uint32_t tree;
    std::uint32_t node;
  };
  std::vector<Pending> pending;
  pending.reserve(forest.internal_nodes());
  m.initial_leafidx.assign(m.n_trees * m.words, 0);
  m.tree_leaves.resize(m.n_trees);
  m.leafvalues.assign(m.n_trees * m.max_leaves * m.n_classes, V{0});
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    const auto& tree = forest.trees[h];
    m.tree_leaves[h] = static_cast<std::uint16_t>(tree.n_leaves);
    const auto init = LeafBitvector::ones(tree.n_leaves);
    std::copy(init.words().begin(), init.words().end(), m.initial_leafidx.begin() + h * m.words);
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const auto& node = tree.nodes[n];
      if (node.leaf) {
        const std::size_t base =
            (h * m.max_leaves + static_cast<std::size_t>(node.leaf_index)) * m.n_classes;
        for (std::size_t c = 0; c < m.n_classes; ++c) {
          m.leafvalues[base + c] = checked_cast<V>(node.values.at(c));
        }
      } else {
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= m.n_features) {
          throw ValidationError("feature index out of range");
        }
        pending.push_back({static_cast<std::uint32_t>(node.feature),
                           checked_cast<F>(node.threshold), static_cast<std::uint32_t>(h),
                           static_cast<std::uint32_t>(n)});
      }
    }
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.feature, a.threshold, a.tree, a.node) <
           std::tie(b.feature, b.threshold, b.tree, b.node);
  });

  m.feature_offsets.assign(m.n_features + 1, 0);
  m.thresholds.reserve(pending.size());
  m.tree_ids.reserve(pending.size());
  m.mask_slots.reserve(pending.size());
  m.bitmasks.assign(pending.size() * m.words, 0);
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& p = pending[i];
    ++m.feature_offsets[p.feature + 1];
    m.thresholds.push_back(p.threshold);
    m.tree_ids.push_back(p.tree);
    m.mask_slots.push_back(static_cast<std::uint32_t>(i));
    const auto mask = build_bitmask(forest.trees[p.tree], p.node);
    std::copy(mask.words().begin(), mask.words().end(), m.bitmasks.begin() + i * m.words);
  }
  for (std::size_t k = 0; k < m.n_features; ++k) m.feature_offsets[k + 1] += m.feature_offsets[k];
  return m;
}

namespace detail {

template <FeatureType F>
void check_instance(std::span<const F> x, std::size_t n_features) {
  if (x.size() != n_features) {
    throw ArgumentError("instance has " + std::to_string(x.size()) + " features, model expects " +
                        std::to_string(n_features));
  }
  if constexpr (std::is_floating_point_v<F>) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x[k])) {
        throw ArgumentError("feature " + std::to_string(k) + " is not finite");
      }
    }
  }
}

// x triggers a triple when the instance goes right: x > t for <= splits and
// x >= t for < splits.
template <bool kStrict, class F>
constexpr bool triggers(F x, F t) noexcept {
  if constexpr (kStrict) {
    return x >= t;
  } else {
    return x > t;
  }
}

template <std::size_t W, bool kStrict, bool kBreak, FeatureType F, LeafType V>
void qs_masks(const QSModel<F, V>& m, const F* x, std::uint64_t* leafidx) noexcept {
  const std::uint32_t* offsets = m.feature_offsets.data();
  const F* thr = m.thresholds.data();
  const std::uint32_t* trees = m.tree_ids.data();
  const std::uint32_t* slots = m.mask_slots.data();
  const std::uint64_t* masks = m.bitmasks.data();
  for (std::size_t k = 0; k < m.n_features; ++k) {
    const F xk = x[k];
    const std::uint32_t end = offsets[k + 1];
    for (std::uint32_t i = offsets[k]; i < end; ++i) {
      if (triggers<kStrict>(xk, thr[i])) {
        std::uint64_t* b = leafidx + std::size_t{trees[i]} * W;
        const std::uint64_t* bm = masks + std::size_t{slots[i]} * W;
        for (std::size_t w = 0; w < W; ++w) b[w] &= bm[w];
      } else if constexpr (kBreak) {
        break;
      }
    }
  }
}

template <std::size_t W, FeatureType F, LeafType V>
void qs_masks_dispatch(const QSModel<F, V>& m, const F* x, std::uint64_t* leafidx,
                       ScanMode mode) noexcept {
  const bool strict = m.comparison == Comparison::kLt;
  if (mode == ScanMode::kBreak) {
    strict ? qs_masks<W, true, true>(m, x, leafidx) : qs_masks<W, false, true>(m, x, leafidx);
  } else {
    strict ? qs_masks<W, true, false>(m, x, leafidx) : qs_masks<W, false, false>(m, x, leafidx);
  }
}

}  // namespace detail

// Mask computation for one instance: leafidx (n_trees * words) ends holding
// every tree's leaf bitvector.
template <FeatureType F, LeafType V>
void qs_compute_leafidx(const QSModel<F, V>& m, std::span<const F> x,
                        std::span<std::uint64_t> leafidx, ScanMode mode = ScanMode::kBreak) {
  detail::check_instance(x, m.n_features);
  if (leafidx.size() != m.initial_leafidx.size()) throw ArgumentError("leafidx size mismatch");
  std::copy(m.initial_leafidx.begin(), m.initial_leafidx.end(), leafidx.begin());
  switch (m.words) {
    case 1: detail::qs_masks_dispatch<1>(m, x.data(), leafidx.data(), mode); break;
    case 2: detail::qs_masks_dispatch<2>(m, x.data(), leafidx.data(), mode); break;
    case 3: detail::qs_masks_dispatch<3>(m, x.data(), leafidx.data(), mode); break;
    default: detail::qs_masks_dispatch<4>(m, x.data(), leafidx.data(), mode); break;
  }
}

// Reusable per-thread buffer.
struct QSScratch {
  std::vector<std::uint64_t> leafidx;
};

template <FeatureType F, LeafType V>
void qs_exit_leaves(const QSModel<F, V>& m, std::span<const F> x, std::span<std::uint16_t> out,
                    QSScratch& scratch, ScanMode mode = ScanMode::kBreak) {
  if (out.size() != m.n_trees) throw ArgumentError("exit-leaf buffer must hold one per tree");
  scratch.leafidx.resize(m.initial_leafidx.size());
  qs_compute_leafidx(m, x, std::span<std::uint64_t>(scratch.leafidx), mode);
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    out[h] = static_cast<std::uint16_t>(exit_leaf_index(
        std::span<const std::uint64_t>(scratch.leafidx.data() + h * m.words, m.words)));
  }
}

template <FeatureType F, LeafType V>
std::vector<std::uint16_t> qs_exit_leaves(const QSModel<F, V>& m, std::span<const F> x,
                                          ScanMode mode = ScanMode::kBreak) {
  QSScratch scratch;
  std::vector<std::uint16_t> out(m.n_trees);
  qs_exit_leaves(m, x, std::span<std::uint16_t>(out), scratch, mode);
  return out;
}

// Scores one instance into out[0..C). out is overwritten.
template <FeatureType F, LeafType V>
void qs_score_into(const QSModel<F, V>& m, std::span<const F> x,
                   std::span<accum_t<V>> out, QSScratch& scratch) {
  if (out.size() != m.n_classes) throw ArgumentError("score buffer must hold C values");
  scratch.leafidx.resize(m.initial_leafidx.size());
  qs_compute_leafidx(m, x, std::span<std::uint64_t>(scratch.leafidx));
  std::fill(out.begin(), out.end(), accum_t<V>{0});
  const std::size_t stride = m.max_leaves * m.n_classes;
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    const auto j = first_set_bit(scratch.leafidx.data() + h * m.words, m.words);
    if (j < 0) throw InvariantError("tree " + std::to_string(h) + " has an empty leaf bitvector");
    const V* values = m.leafvalues.data() + h * stride + static_cast<std::size_t>(j) * m.n_classes;
    for (std::size_t c = 0; c < m.n_classes; ++c) out[c] += static_cast<accum_t<V>>(values[c]);
  }
}

template <FeatureType F, LeafType V>
std::vector<accum_t<V>> qs_score(const QSModel<F, V>& m, std::span<const F> x) {
  QSScratch scratch;
  std::vector<accum_t<V>> out(m.n_classes);
  qs_score_into(m, x, std::span<accum_t<V>>(out), scratch);
  return out;
}

// Scores n row-major instances; out is instance-major: s(0,0..C-1), s(1,0..C-1), ...
template <FeatureType F, LeafType V>
void qs_score_block(const QSModel<F, V>& m, std::span<const F> instances,
                    std::span<accum_t<V>> out, QSScratch& scratch) {
  const std::size_t d = m.n_features;
  if (d == 0 || instances.size() % d != 0) throw ArgumentError("instance block is not n x d");
  const std::size_t n = instances.size() / d;
  if (out.size() != n * m.n_classes) throw ArgumentError("score block must hold n x C values");
  for (std::size_t i = 0; i < n; ++i) {
    qs_score_into(m, instances.subspan(i * d, d), out.subspan(i * m.n_classes, m.n_classes),
                  scratch);
  }
}

}  // namespace qscorer
