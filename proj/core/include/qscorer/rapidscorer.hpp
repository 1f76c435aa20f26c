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

// RapidScorer: QuickScorer over 16-instance batches with
//  - node merging: one comparison per distinct (feature, threshold),
//  - epitomes: each node bitmask stored as the run of bytes that differ from
//    all-ones plus its byte offset,
//  - a byte-transposed leaf bitvector layout where row m holds byte m of the
//    16 instances' bitvectors, so masks are applied one byte row at a time.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qscorer/bitvector.hpp"
#include "qscorer/layout.hpp"
#include "qscorer/quickscorer.hpp"
#include "qscorer/simd.hpp"

namespace qscorer {

inline constexpr std::size_t kRsLanes = 16;

// Comparison registers needed to cover 16 lanes: 4 for 32-bit features,
// 2 for 16-bit features.
template <FeatureType F>
inline constexpr std::size_t rs_compare_passes = kRsLanes / simd::kLanes<F>;

struct Epitome {
  std::uint8_t offset = 0;          // first byte that differs from all-ones
  std::vector<std::uint8_t> bytes;  // contiguous run of differing bytes

  friend bool operator==(const Epitome&, const Epitome&) = default;
};

// "All-ones" means ones at the mask's n_leaves bits. Throws ArgumentError
// for a mask with no cleared bit.
Epitome encode_epitome(const LeafBitvector& mask);
LeafBitvector expand_epitome(const Epitome& epitome, std::size_t n_leaves);

// Leaf bitvectors of one tree for a 16-instance batch, byte-transposed.
class TransposedLeafIdx {
 public:
  explicit TransposedLeafIdx(std::size_t n_leaves);

  static TransposedLeafIdx from_bitvectors(std::span<const LeafBitvector> vectors);
  std::vector<LeafBitvector> to_bitvectors() const;

  std::size_t n_leaves() const noexcept { return n_leaves_; }
  std::size_t rows() const noexcept { return (n_leaves_ + 7) / 8; }
  std::uint8_t& at(std::size_t row, std::size_t lane) { return bytes_[row * kRsLanes + lane]; }
  std::uint8_t at(std::size_t row, std::size_t lane) const {
    return bytes_[row * kRsLanes + lane];
  }
  std::span<std::uint8_t> data() noexcept { return bytes_; }
  std::span<const std::uint8_t> data() const noexcept { return bytes_; }

  friend bool operator==(const TransposedLeafIdx&, const TransposedLeafIdx&) = default;

 private:
  std::size_t n_leaves_;
  std::vector<std::uint8_t> bytes_;
};

namespace detail {

// rows x 16 bytes at `t`. Rows [offset, offset + n) are ANDed with the
// epitome bytes in the lanes whose mask byte is 0xFF.
inline void apply_epitome_simd(std::uint8_t* t, const std::uint8_t* bytes, std::size_t n,
                               simd::u8x16 lane_mask) noexcept {
  const simd::u8x16 keep = ~lane_mask;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = simd::load<simd::u8x16>(t + r * kRsLanes);
    const auto e = simd::broadcast<simd::u8x16>(bytes[r]);
    simd::store(t + r * kRsLanes, row & (e | keep));
  }
}

inline void apply_epitome_scalar(std::uint8_t* t, const std::uint8_t* bytes, std::size_t n,
                                 const std::uint8_t* lane_mask) noexcept {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l < kRsLanes; ++l) {
      if (lane_mask[l]) t[r * kRsLanes + l] &= bytes[r];
    }
  }
}

// First set bit of every column of a rows x 16 transposed block. Returns
// false if some column is all zero. The per-byte trailing-zero count is the
// bit-reverse + count-leading-zeros of the NEON formulation.
inline bool find_leaf_simd(const std::uint8_t* t, std::size_t rows, std::uint8_t out[16]) noexcept {
  using simd::u8x16;
  u8x16 b = {};
  u8x16 c1 = {};
  const u8x16 zero = {};
  for (std::size_t m = 0; m < rows; ++m) {
    const auto row = simd::load<u8x16>(t + m * kRsLanes);
    const auto y = (u8x16)(row != zero);
    const auto z = y & (u8x16)(b == zero);
    b = (row & z) | (b & ~z);
    c1 = (simd::broadcast<u8x16>(static_cast<std::uint8_t>(m)) & z) | (c1 & ~z);
  }
  const u8x16 low = b & (zero - b);
  const u8x16 one = simd::broadcast<u8x16>(std::uint8_t{1});
  const u8x16 two = simd::broadcast<u8x16>(std::uint8_t{2});
  const u8x16 four = simd::broadcast<u8x16>(std::uint8_t{4});
  const u8x16 c2 = ((u8x16)((low & 0xAA) != zero) & one) | ((u8x16)((low & 0xCC) != zero) & two) |
                   ((u8x16)((low & 0xF0) != zero) & four);
  const u8x16 idx = c1 * 8 + c2;
  simd::store(out, idx);
  return !simd::any((u8x16)(b == zero));
}

inline bool find_leaf_scalar(const std::uint8_t* t, std::size_t rows, std::uint8_t out[16]) noexcept {
  bool ok = true;
  for (std::size_t l = 0; l < kRsLanes; ++l) {
    out[l] = 0;
    bool found = false;
    for (std::size_t m = 0; m < rows && !found; ++m) {
      const std::uint8_t byte = t[m * kRsLanes + l];
      if (byte) {
        out[l] = static_cast<std::uint8_t>(m * 8 + static_cast<std::size_t>(std::countr_zero(byte)));
        found = true;
      }
    }
    ok = ok && found;
  }
  return ok;
}

}  // namespace detail

// ANDs the expanded epitome into the bitvectors of the lanes set in lane_mask.
void apply_epitome(const Epitome& epitome, TransposedLeafIdx& t,
                   const std::array<bool, kRsLanes>& lane_mask, Backend backend = Backend::kSimd);

// Exit leaf of each of the 16 columns. Throws InvariantError on an all-zero column.
std::array<std::uint16_t, kRsLanes> find_leaf_index_batch(const TransposedLeafIdx& t,
                                                          Backend backend = Backend::kSimd);

struct NodeRef {
  std::uint32_t tree = 0;
  std::uint32_t slot = 0;  // bitmask slot in the QSModel
};

// Per-feature lists of distinct thresholds, each with the nodes it updates.
template <FeatureType F>
struct MergedFeatureLists {
  std::vector<std::uint32_t> feature_offsets;  // n_features + 1, into thresholds
  std::vector<F> thresholds;                   // strictly ascending per feature when merged
  std::vector<std::uint32_t> target_offsets;   // thresholds.size() + 1, into targets
  std::vector<NodeRef> targets;
  std::size_t internal_nodes = 0;

  std::size_t unique_nodes() const noexcept { return thresholds.size(); }
  // |distinct (feature, threshold)| / |internal nodes|
  double unique_fraction() const noexcept {
    return internal_nodes == 0 ? 1.0
                               : static_cast<double>(unique_nodes()) /
                                     static_cast<double>(internal_nodes);
  }
};

// Collapses triples sharing (feature, threshold). With merge = false every
// triple stays its own group, which gives the unmerged reference pipeline.
// Nodes of one tree that share (feature, threshold) are kept as separate
// targets.
template <FeatureType F, LeafType V>
MergedFeatureLists<F> merge_nodes(const QSModel<F, V>& m, bool merge = true) {
  MergedFeatureLists<F> out;
  out.internal_nodes = m.triple_count();
  out.feature_offsets.assign(m.n_features + 1, 0);
  out.target_offsets.push_back(0);
  out.targets.reserve(m.triple_count());
  for (std::size_t k = 0; k < m.n_features; ++k) {
    for (std::uint32_t i = m.feature_offsets[k]; i < m.feature_offsets[k + 1]; ++i) {
      const bool same = merge && i > m.feature_offsets[k] && m.thresholds[i] == m.thresholds[i - 1];
      if (!same) {
        if (!out.thresholds.empty()) {
          out.target_offsets.push_back(static_cast<std::uint32_t>(out.targets.size()));
        }
        out.thresholds.push_back(m.thresholds[i]);
      }
      out.targets.push_back({m.tree_ids[i], m.mask_slots[i]});
    }
    out.feature_offsets[k + 1] = static_cast<std::uint32_t>(out.thresholds.size());
  }
  if (!out.thresholds.empty()) {
    out.target_offsets.push_back(static_cast<std::uint32_t>(out.targets.size()));
  }
  return out;
}

struct RsTarget {
  std::uint32_t tree = 0;
  std::uint32_t pool = 0;    // start of the epitome bytes in RSModel::epitome_pool
  std::uint8_t offset = 0;   // first row touched
  std::uint8_t length = 0;   // rows touched
};

template <FeatureType F, LeafType V>
struct RSModel {
  using feature_type = F;
  using leaf_type = V;

  std::size_t n_features = 0;
  std::size_t n_trees = 0;
  std::size_t n_classes = 1;
  std::size_t max_leaves = 0;
  std::size_t rows = 0;  // ceil(L / 8)
  Comparison comparison = Comparison::kLeq;
  std::optional<QuantizationSpec> quantization;
  bool merged = true;

  MergedFeatureLists<F> lists;
  std::vector<RsTarget> targets;  // parallel to lists.targets
  std::vector<std::uint8_t> epitome_pool;
  std::vector<std::uint8_t> initial_rows;  // n_trees * rows
  std::vector<V> leafvalues;               // as in QSModel

  // Bytes used by the compressed bitmasks.
  std::size_t epitome_bytes() const noexcept { return epitome_pool.size(); }
};

template <FeatureType F, LeafType V>
RSModel<F, V> build_rs_model(const QSModel<F, V>& qs, bool merge = true) {
  if (qs.max_leaves > kMaxLeaves) {
    throw UnsupportedError("RapidScorer supports at most 256 leaves per tree");
  }
  RSModel<F, V> m;
  m.n_features = qs.n_features;
  m.n_trees = qs.n_trees;
  m.n_classes = qs.n_classes;
  m.max_leaves = qs.max_leaves;
  m.rows = (qs.max_leaves + 7) / 8;
  m.comparison = qs.comparison;
  m.quantization = qs.quantization;
  m.merged = merge;
  m.lists = merge_nodes(qs, merge);
  m.leafvalues = qs.leafvalues;

  m.initial_rows.assign(m.n_trees * m.rows, 0);
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    const auto init = LeafBitvector::ones(qs.tree_leaves[h]);
    for (std::size_t r = 0; r < init.n_bytes(); ++r) m.initial_rows[h * m.rows + r] = init.byte(r);
  }

  // One epitome per bitmask slot, shared by every target that references it.
  std::vector<RsTarget> by_slot(qs.triple_count());
  std::vector<std::uint8_t> slot_done(qs.triple_count(), 0);
  m.targets.reserve(m.lists.targets.size());
  for (const NodeRef& ref : m.lists.targets) {
    if (!slot_done[ref.slot]) {
      const auto mask = LeafBitvector::from_words(
          std::span<const std::uint64_t>(qs.bitmasks.data() + std::size_t{ref.slot} * qs.words,
                                          qs.words),
          qs.tree_leaves[ref.tree]);
      const Epitome e = encode_epitome(mask);
      RsTarget t;
      t.tree = ref.tree;
      t.pool = static_cast<std::uint32_t>(m.epitome_pool.size());
      t.offset = e.offset;
      t.length = static_cast<std::uint8_t>(e.bytes.size());
      m.epitome_pool.insert(m.epitome_pool.end(), e.bytes.begin(), e.bytes.end());
      by_slot[ref.slot] = t;
      slot_done[ref.slot] = 1;
    }
    m.targets.push_back(by_slot[ref.slot]);
  }
  return m;
}

template <FeatureType F>
struct RSScratch {
  std::vector<F> lanes;                // n_features * 16, feature-major
  std::vector<std::uint8_t> leafidx;   // (tree * rows + row) * 16 + lane
  std::vector<F> padded;
};

namespace detail {

template <bool kStrict, FeatureType F>
simd::u8x16 rs_lane_mask_simd(const F* x, F threshold) noexcept {
  using vec = typename simd::Lanes<F>::vec;
  using mask_t = typename simd::Lanes<F>::mask;
  constexpr std::size_t v = simd::kLanes<F>;
  constexpr std::size_t passes = rs_compare_passes<F>;
  const vec g = simd::broadcast<vec>(threshold);
  mask_t m[passes];
  for (std::size_t p = 0; p < passes; ++p) {
    const vec xv = simd::load<vec>(x + p * v);
    if constexpr (kStrict) {
      m[p] = xv >= g;
    } else {
      m[p] = xv > g;
    }
  }
  return simd::narrow_to_bytes(m);
}

template <bool kStrict, bool kBreak, FeatureType F, LeafType V>
void rs_feature(const RSModel<F, V>& m, std::size_t k, Backend backend,
                RSScratch<F>& scratch) noexcept {
  const F* x = scratch.lanes.data() + k * kRsLanes;
  std::uint8_t* leafidx = scratch.leafidx.data();
  const auto& lists = m.lists;
  for (std::uint32_t g = lists.feature_offsets[k]; g < lists.feature_offsets[k + 1]; ++g) {
    const F t = lists.thresholds[g];
    simd::u8x16 lane_mask;
    if (backend == Backend::kSimd) {
      lane_mask = rs_lane_mask_simd<kStrict>(x, t);
    } else {
      for (std::size_t l = 0; l < kRsLanes; ++l) {
        lane_mask[l] = triggers<kStrict>(x[l], t) ? 0xFF : 0x00;
      }
    }
    if (!simd::any(lane_mask)) {
      if constexpr (kBreak) {
        break;
      } else {
        continue;
      }
    }
    std::uint8_t lane_bytes[kRsLanes];
    if (backend == Backend::kScalar) simd::store(lane_bytes, lane_mask);
    for (std::uint32_t i = lists.target_offsets[g]; i < lists.target_offsets[g + 1]; ++i) {
      const RsTarget& tg = m.targets[i];
      std::uint8_t* rows = leafidx + (std::size_t{tg.tree} * m.rows + tg.offset) * kRsLanes;
      const std::uint8_t* bytes = m.epitome_pool.data() + tg.pool;
      if (backend == Backend::kSimd) {
        apply_epitome_simd(rows, bytes, tg.length, lane_mask);
      } else {
        apply_epitome_scalar(rows, bytes, tg.length, lane_bytes);
      }
    }
  }
}

}  // namespace detail

// Loads a batch of 16 row-major instances and resets the leaf bitvectors.
template <FeatureType F, LeafType V>
void rs_begin_batch(const RSModel<F, V>& m, std::span<const F> batch, RSScratch<F>& scratch) {
  const std::size_t d = m.n_features;
  if (batch.size() != kRsLanes * d) {
    throw ArgumentError("RapidScorer batches hold exactly 16 instances");
  }
  for (std::size_t i = 0; i < kRsLanes; ++i) detail::check_instance(batch.subspan(i * d, d), d);
  scratch.lanes.resize(kRsLanes * d);
  transpose_to_lanes(batch, kRsLanes, d, std::span<F>(scratch.lanes));
  scratch.leafidx.resize(m.n_trees * m.rows * kRsLanes);
  for (std::size_t r = 0; r < m.n_trees * m.rows; ++r) {
    std::fill_n(scratch.leafidx.begin() + static_cast<std::ptrdiff_t>(r * kRsLanes), kRsLanes,
                m.initial_rows[r]);
  }
}

// Mask computation restricted to feature k.
template <FeatureType F, LeafType V>
void rs_apply_feature(const RSModel<F, V>& m, std::size_t k, Backend backend,
                      RSScratch<F>& scratch, ScanMode mode = ScanMode::kBreak) {
  const bool strict = m.comparison == Comparison::kLt;
  const bool brk = mode == ScanMode::kBreak;
  if (strict) {
    brk ? detail::rs_feature<true, true>(m, k, backend, scratch)
        : detail::rs_feature<true, false>(m, k, backend, scratch);
  } else {
    brk ? detail::rs_feature<false, true>(m, k, backend, scratch)
        : detail::rs_feature<false, false>(m, k, backend, scratch);
  }
}

template <FeatureType F, LeafType V>
void rs_compute_leafidx(const RSModel<F, V>& m, std::span<const F> batch, Backend backend,
                        RSScratch<F>& scratch, ScanMode mode = ScanMode::kBreak) {
  rs_begin_batch(m, batch, scratch);
  for (std::size_t k = 0; k < m.n_features; ++k) rs_apply_feature(m, k, backend, scratch, mode);
}

namespace detail {

template <FeatureType F, LeafType V>
void rs_tree_leaves(const RSModel<F, V>& m, const RSScratch<F>& scratch, std::size_t h,
                    Backend backend, std::uint8_t out[16]) {
  const std::uint8_t* t = scratch.leafidx.data() + h * m.rows * kRsLanes;
  const bool ok = backend == Backend::kSimd ? find_leaf_simd(t, m.rows, out)
                                            : find_leaf_scalar(t, m.rows, out);
  if (!ok) throw InvariantError("tree " + std::to_string(h) + " has an empty leaf bitvector");
}

}  // namespace detail

// Exit leaves, lane-major: out[lane * n_trees + h].
template <FeatureType F, LeafType V>
void rs_exit_leaves_batch(const RSModel<F, V>& m, std::span<const F> batch,
                          std::span<std::uint16_t> out, Backend backend, RSScratch<F>& scratch,
                          ScanMode mode = ScanMode::kBreak) {
  if (out.size() != kRsLanes * m.n_trees) throw ArgumentError("exit-leaf buffer must hold 16 x M");
  rs_compute_leafidx(m, batch, backend, scratch, mode);
  std::uint8_t idx[kRsLanes];
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    detail::rs_tree_leaves(m, scratch, h, backend, idx);
    for (std::size_t l = 0; l < kRsLanes; ++l) out[l * m.n_trees + h] = idx[l];
  }
}

// Scores 16 instances; out is class-major: out[c * 16 + lane].
template <FeatureType F, LeafType V>
void rs_score_batch(const RSModel<F, V>& m, std::span<const F> batch, std::span<accum_t<V>> out,
                    Backend backend, RSScratch<F>& scratch) {
  if (out.size() != kRsLanes * m.n_classes) {
    throw ArgumentError("score buffer must hold 16 x C values");
  }
  rs_compute_leafidx(m, batch, backend, scratch);
  std::fill(out.begin(), out.end(), accum_t<V>{0});
  const std::size_t C = m.n_classes;
  std::uint8_t idx[kRsLanes];
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    detail::rs_tree_leaves(m, scratch, h, backend, idx);
    const V* tree_values = m.leafvalues.data() + h * m.max_leaves * C;
    for (std::size_t l = 0; l < kRsLanes; ++l) {
      const V* values = tree_values + std::size_t{idx[l]} * C;
      for (std::size_t c = 0; c < C; ++c) out[c * kRsLanes + l] += static_cast<accum_t<V>>(values[c]);
    }
  }
}

template <FeatureType F, LeafType V>
std::vector<accum_t<V>> rs_score_batch(const RSModel<F, V>& m, std::span<const F> batch,
                                       Backend backend = Backend::kSimd) {
  RSScratch<F> scratch;
  std::vector<accum_t<V>> out(kRsLanes * m.n_classes);
  rs_score_batch(m, batch, std::span<accum_t<V>>(out), backend, scratch);
  return out;
}

// Scores n row-major instances in batches of 16 (last batch padded with the
// final instance, padded outputs dropped). out is instance-major.
template <FeatureType F, LeafType V>
void rs_score(const RSModel<F, V>& m, std::span<const F> instances, std::span<accum_t<V>> out,
              Backend backend, RSScratch<F>& scratch) {
  const std::size_t d = m.n_features;
  const std::size_t C = m.n_classes;
  if (d == 0 || instances.size() % d != 0) throw ArgumentError("instance block is not n x d");
  const std::size_t n = instances.size() / d;
  if (out.size() != n * C) throw ArgumentError("score block must hold n x C values");
  std::vector<accum_t<V>> block(kRsLanes * C);
  for (std::size_t start = 0; start < n; start += kRsLanes) {
    const std::size_t real = std::min(kRsLanes, n - start);
    std::span<const F> batch;
    if (real == kRsLanes) {
      batch = instances.subspan(start * d, kRsLanes * d);
    } else {
      scratch.padded.assign(instances.begin() + static_cast<std::ptrdiff_t>(start * d),
                            instances.end());
      for (std::size_t p = real; p < kRsLanes; ++p) {
        scratch.padded.insert(scratch.padded.end(), instances.end() - static_cast<std::ptrdiff_t>(d),
                              instances.end());
      }
      batch = scratch.padded;
    }
    rs_score_batch(m, batch, std::span<accum_t<V>>(block), backend, scratch);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t l = 0; l < real; ++l) out[(start + l) * C + c] = block[c * kRsLanes + l];
    }
  }
}

}  // namespace qscorer
