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

// V-QuickScorer: the QuickScorer scan applied to v instances at once under a
// 128-bit register contract. v = 4 for 32-bit features (float or int32) and
// v = 8 for 16-bit quantized features.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qscorer/layout.hpp"
#include "qscorer/quickscorer.hpp"
#include "qscorer/simd.hpp"

namespace qscorer {

template <FeatureType F, LeafType V>
constexpr std::size_t lane_width(const QSModel<F, V>&) noexcept {
  return simd::kLanes<F>;
}

// Widens 8 all-ones/all-zeros 16-bit lane masks to leaf-bitvector-sized
// masks: 32-bit for L = 32, 64-bit for L = 64. Other L return nullopt and the
// caller blends lane by lane.
inline std::optional<std::vector<std::uint64_t>> widen_lane_mask(
    std::span<const std::uint16_t> lanes, std::size_t n_leaves) {
  if (lanes.size() != simd::kLanes<std::int16_t>) {
    throw ArgumentError("widen_lane_mask expects 8 lanes");
  }
  for (auto l : lanes) {
    if (l != 0 && l != 0xFFFF) throw ArgumentError("lane masks must be all-ones or all-zeros");
  }
  if (n_leaves != 32 && n_leaves != 64) return std::nullopt;
  const auto m = simd::load<simd::i16x8>(lanes.data());
  std::vector<std::uint64_t> out(lanes.size());
  if (n_leaves == 32) {
    simd::i32x4 wide[2];
    simd::widen(m, wide);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::uint32_t>(wide[i / 4][i % 4]);
    }
  } else {
    simd::i64x2 wide[4];
    simd::widen(m, wide);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::uint64_t>(wide[i / 2][i % 2]);
    }
  }
  return out;
}

template <FeatureType F>
struct VQSScratch {
  std::vector<F> lanes;               // n_features * v, feature-major
  std::vector<std::uint64_t> leafidx;  // (tree * words + word) * v + lane
  std::vector<F> padded;
};

namespace detail {

template <std::size_t W, bool kStrict, bool kBreak, FeatureType F, LeafType V>
void vqs_masks_simd(const QSModel<F, V>& m, const F* lanes, std::uint64_t* leafidx) noexcept {
  constexpr std::size_t v = simd::kLanes<F>;
  using vec = typename simd::Lanes<F>::vec;
  using mask_t = typename simd::Lanes<F>::mask;
  const std::uint32_t* offsets = m.feature_offsets.data();
  const F* thr = m.thresholds.data();
  const std::uint32_t* trees = m.tree_ids.data();
  const std::uint32_t* slots = m.mask_slots.data();
  const std::uint64_t* masks = m.bitmasks.data();
  for (std::size_t k = 0; k < m.n_features; ++k) {
    const vec x = simd::load<vec>(lanes + k * v);
    const std::uint32_t end = offsets[k + 1];
    for (std::uint32_t i = offsets[k]; i < end; ++i) {
      const vec g = simd::broadcast<vec>(thr[i]);
      mask_t mask;
      if constexpr (kStrict) {
        mask = x >= g;
      } else {
        mask = x > g;
      }
      if (!simd::any(mask)) {
        if constexpr (kBreak) {
          break;
        } else {
          continue;
        }
      }
      simd::i64x2 wide[v / 2];
      simd::widen(mask, wide);
      std::uint64_t* b = leafidx + std::size_t{trees[i]} * W * v;
      const std::uint64_t* bm = masks + std::size_t{slots[i]} * W;
      for (std::size_t w = 0; w < W; ++w) {
        const auto mv = simd::broadcast<simd::u64x2>(bm[w]);
        for (std::size_t r = 0; r < v / 2; ++r) {
          std::uint64_t* p = b + w * v + 2 * r;
          const auto bv = simd::load<simd::u64x2>(p);
          const auto y = mv & bv;
          const auto sel = reinterpret_cast<simd::u64x2>(wide[r]);
          simd::store(p, (y & sel) | (bv & ~sel));
        }
      }
    }
  }
}

template <std::size_t W, bool kStrict, bool kBreak, FeatureType F, LeafType V>
void vqs_masks_scalar(const QSModel<F, V>& m, const F* lanes, std::uint64_t* leafidx) noexcept {
  constexpr std::size_t v = simd::kLanes<F>;
  for (std::size_t k = 0; k < m.n_features; ++k) {
    const F* x = lanes + k * v;
    for (std::uint32_t i = m.feature_offsets[k]; i < m.feature_offsets[k + 1]; ++i) {
      bool hit[v];
      bool any = false;
      for (std::size_t l = 0; l < v; ++l) {
        hit[l] = triggers<kStrict>(x[l], m.thresholds[i]);
        any = any || hit[l];
      }
      if (!any) {
        if constexpr (kBreak) {
          break;
        } else {
          continue;
        }
      }
      std::uint64_t* b = leafidx + std::size_t{m.tree_ids[i]} * W * v;
      const std::uint64_t* bm = m.bitmasks.data() + std::size_t{m.mask_slots[i]} * W;
      for (std::size_t l = 0; l < v; ++l) {
        if (!hit[l]) continue;
        for (std::size_t w = 0; w < W; ++w) b[w * v + l] &= bm[w];
      }
    }
  }
}

template <std::size_t W, FeatureType F, LeafType V>
void vqs_masks_dispatch(const QSModel<F, V>& m, const F* lanes, std::uint64_t* leafidx,
                        Backend backend, ScanMode mode) noexcept {
  const bool strict = m.comparison == Comparison::kLt;
  const bool brk = mode == ScanMode::kBreak;
  if (backend == Backend::kSimd) {
    if (strict) {
      brk ? vqs_masks_simd<W, true, true>(m, lanes, leafidx)
          : vqs_masks_simd<W, true, false>(m, lanes, leafidx);
    } else {
      brk ? vqs_masks_simd<W, false, true>(m, lanes, leafidx)
          : vqs_masks_simd<W, false, false>(m, lanes, leafidx);
    }
  } else {
    if (strict) {
      brk ? vqs_masks_scalar<W, true, true>(m, lanes, leafidx)
          : vqs_masks_scalar<W, true, false>(m, lanes, leafidx);
    } else {
      brk ? vqs_masks_scalar<W, false, true>(m, lanes, leafidx)
          : vqs_masks_scalar<W, false, false>(m, lanes, leafidx);
    }
  }
}

}  // namespace detail

// Mask computation for one batch of v row-major instances. On return
// scratch.leafidx holds the leaf bitvectors laid out (tree, word, lane).
template <FeatureType F, LeafType V>
void vqs_compute_leafidx(const QSModel<F, V>& m, std::span<const F> batch, Backend backend,
                         VQSScratch<F>& scratch, ScanMode mode = ScanMode::kBreak) {
  constexpr std::size_t v = simd::kLanes<F>;
  const std::size_t d = m.n_features;
  if (batch.size() != v * d) {
    throw ArgumentError("V-QuickScorer batches hold exactly " + std::to_string(v) + " instances");
  }
  for (std::size_t i = 0; i < v; ++i) detail::check_instance(batch.subspan(i * d, d), d);
  scratch.lanes.resize(v * d);
  transpose_to_lanes(batch, v, d, std::span<F>(scratch.lanes));
  const std::size_t W = m.words;
  scratch.leafidx.resize(m.n_trees * W * v);
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    for (std::size_t w = 0; w < W; ++w) {
      std::fill_n(scratch.leafidx.begin() + static_cast<std::ptrdiff_t>((h * W + w) * v), v,
                  m.initial_leafidx[h * W + w]);
    }
  }
  const F* lanes = scratch.lanes.data();
  std::uint64_t* leafidx = scratch.leafidx.data();
  switch (W) {
    case 1: detail::vqs_masks_dispatch<1>(m, lanes, leafidx, backend, mode); break;
    case 2: detail::vqs_masks_dispatch<2>(m, lanes, leafidx, backend, mode); break;
    case 3: detail::vqs_masks_dispatch<3>(m, lanes, leafidx, backend, mode); break;
    default: detail::vqs_masks_dispatch<4>(m, lanes, leafidx, backend, mode); break;
  }
}

namespace detail {

template <FeatureType F, LeafType V>
std::size_t vqs_lane_exit_leaf(const QSModel<F, V>& m, const std::uint64_t* leafidx,
                               std::size_t h, std::size_t lane) {
  constexpr std::size_t v = simd::kLanes<F>;
  std::uint64_t words[LeafBitvector::kMaxWords];
  for (std::size_t w = 0; w < m.words; ++w) words[w] = leafidx[(h * m.words + w) * v + lane];
  const auto j = first_set_bit(words, m.words);
  if (j < 0) throw InvariantError("tree " + std::to_string(h) + " has an empty leaf bitvector");
  return static_cast<std::size_t>(j);
}

}  // namespace detail

// Exit leaves of a batch, lane-major: out[lane * n_trees + h].
template <FeatureType F, LeafType V>
void vqs_exit_leaves_batch(const QSModel<F, V>& m, std::span<const F> batch,
                           std::span<std::uint16_t> out, Backend backend, VQSScratch<F>& scratch,
                           ScanMode mode = ScanMode::kBreak) {
  constexpr std::size_t v = simd::kLanes<F>;
  if (out.size() != v * m.n_trees) throw ArgumentError("exit-leaf buffer must hold v x M");
  vqs_compute_leafidx(m, batch, backend, scratch, mode);
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    for (std::size_t l = 0; l < v; ++l) {
      out[l * m.n_trees + h] =
          static_cast<std::uint16_t>(detail::vqs_lane_exit_leaf(m, scratch.leafidx.data(), h, l));
    }
  }
}

// Scores v instances. out is class-major: out[c * v + lane].
template <FeatureType F, LeafType V>
void vqs_score_batch(const QSModel<F, V>& m, std::span<const F> batch,
                     std::span<accum_t<V>> out, Backend backend, VQSScratch<F>& scratch) {
  constexpr std::size_t v = simd::kLanes<F>;
  if (out.size() != v * m.n_classes) throw ArgumentError("score buffer must hold v x C values");
  vqs_compute_leafidx(m, batch, backend, scratch);
  std::fill(out.begin(), out.end(), accum_t<V>{0});
  const std::size_t C = m.n_classes;
  for (std::size_t h = 0; h < m.n_trees; ++h) {
    const V* tree_values = m.leafvalues.data() + h * m.max_leaves * C;
    for (std::size_t l = 0; l < v; ++l) {
      const std::size_t j = detail::vqs_lane_exit_leaf(m, scratch.leafidx.data(), h, l);
      const V* values = tree_values + j * C;
      for (std::size_t c = 0; c < C; ++c) out[c * v + l] += static_cast<accum_t<V>>(values[c]);
    }
  }
}

template <FeatureType F, LeafType V>
std::vector<accum_t<V>> vqs_score_batch(const QSModel<F, V>& m, std::span<const F> batch,
                                        Backend backend = Backend::kSimd) {
  VQSScratch<F> scratch;
  std::vector<accum_t<V>> out(simd::kLanes<F> * m.n_classes);
  vqs_score_batch(m, batch, std::span<accum_t<V>>(out), backend, scratch);
  return out;
}

// Scores n row-major instances in batches of v. The final partial batch is
// padded by repeating the last instance and the padded outputs are dropped.
// out is instance-major (n x C).
template <FeatureType F, LeafType V>
void vqs_score(const QSModel<F, V>& m, std::span<const F> instances, std::span<accum_t<V>> out,
               Backend backend, VQSScratch<F>& scratch) {
  constexpr std::size_t v = simd::kLanes<F>;
  const std::size_t d = m.n_features;
  const std::size_t C = m.n_classes;
  if (d == 0 || instances.size() % d != 0) throw ArgumentError("instance block is not n x d");
  const std::size_t n = instances.size() / d;
  if (out.size() != n * C) throw ArgumentError("score block must hold n x C values");
  std::vector<accum_t<V>> block(v * C);
  for (std::size_t start = 0; start < n; start += v) {
    const std::size_t real = std::min(v, n - start);
    std::span<const F> batch;
    if (real == v) {
      batch = instances.subspan(start * d, v * d);
    } else {
      scratch.padded.assign(instances.begin() + static_cast<std::ptrdiff_t>(start * d),
                            instances.end());
      for (std::size_t p = real; p < v; ++p) {
        scratch.padded.insert(scratch.padded.end(), instances.end() - static_cast<std::ptrdiff_t>(d),
                              instances.end());
      }
      batch = scratch.padded;
    }
    vqs_score_batch(m, batch, std::span<accum_t<V>>(block), backend, scratch);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t l = 0; l < real; ++l) out[(start + l) * C + c] = block[c * v + l];
    }
  }
}

}  // namespace qscorer
