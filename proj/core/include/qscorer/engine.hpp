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

// One compiled model in every representation the scorers need, plus a
// variant over the supported numeric domains.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qscorer/baseline.hpp"
#include "qscorer/dataset.hpp"
#include "qscorer/forest.hpp"
#include "qscorer/io.hpp"
#include "qscorer/quantize.hpp"
#include "qscorer/quickscorer.hpp"
#include "qscorer/rapidscorer.hpp"
#include "qscorer/vqs.hpp"

namespace qscorer {

enum class Impl : std::uint8_t { kNaive, kIe, kNa, kQs, kVqs, kRs };

std::string_view impl_name(Impl impl) noexcept;
Impl parse_impl(std::string_view name);
// Comma-separated list, e.g. "qs,vqs,rs".
std::vector<Impl> parse_impl_list(std::string_view list);
const std::vector<Impl>& all_impls();

template <FeatureType F, LeafType V>
struct Engine {
  using feature_type = F;
  using leaf_type = V;
  using accum_type = accum_t<V>;

  BasicForest<F, V> forest;
  NativeLayout<F, V> native;
  QSModel<F, V> qs;
  RSModel<F, V> rs;
  std::optional<QuantizationSpec> quantization;
  Backend backend = Backend::kSimd;

  struct Scratch {
    QSScratch qs;
    VQSScratch<F> vqs;
    RSScratch<F> rs;
    std::vector<accum_t<V>> block;
    std::vector<std::uint16_t> leaves;
    std::vector<F> padded;
  };

  std::size_t n_features() const noexcept { return forest.n_features; }
  std::size_t n_trees() const noexcept { return forest.trees.size(); }
  std::size_t n_classes() const noexcept { return forest.n_classes; }

  // Scores n row-major instances; out is instance-major (n x C).
  void score(Impl impl, std::span<const F> x, std::span<accum_t<V>> out, Scratch& s) const {
    const std::size_t d = n_features();
    const std::size_t C = n_classes();
    if (d == 0 || x.size() % d != 0) throw ArgumentError("instance block is not n x d");
    const std::size_t n = x.size() / d;
    if (out.size() != n * C) throw ArgumentError("score block must hold n x C values");
    switch (impl) {
      case Impl::kNaive:
        for (std::size_t i = 0; i < n; ++i) {
          const auto r = naive_score(forest, x.subspan(i * d, d));
          std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(i * C));
        }
        break;
      case Impl::kIe:
        for (std::size_t i = 0; i < n; ++i) ie_score_into(forest, x.subspan(i * d, d), out.subspan(i * C, C));
        break;
      case Impl::kNa:
        for (std::size_t i = 0; i < n; ++i) na_score_into(native, x.subspan(i * d, d), out.subspan(i * C, C));
        break;
      case Impl::kQs:
        qs_score_block(qs, x, out, s.qs);
        break;
      case Impl::kVqs:
        vqs_score(qs, x, out, backend, s.vqs);
        break;
      case Impl::kRs:
        rs_score(rs, x, out, backend, s.rs);
        break;
    }
  }

  // Exit leaves of n instances, instance-major (n x M).
  void exit_leaves(Impl impl, std::span<const F> x, std::span<std::uint16_t> out, Scratch& s) const {
    const std::size_t d = n_features();
    const std::size_t M = n_trees();
    if (d == 0 || x.size() % d != 0) throw ArgumentError("instance block is not n x d");
    const std::size_t n = x.size() / d;
    if (out.size() != n * M) throw ArgumentError("exit-leaf block must hold n x M values");
    switch (impl) {
      case Impl::kNaive:
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t h = 0; h < M; ++h) {
            out[i * M + h] = static_cast<std::uint16_t>(
                naive_exit_leaf(forest.trees[h], x.subspan(i * d, d), forest.comparison));
          }
        }
        break;
      case Impl::kIe:
        for (std::size_t i = 0; i < n; ++i) ie_exit_leaves(forest, x.subspan(i * d, d), out.subspan(i * M, M));
        break;
      case Impl::kNa:
        for (std::size_t i = 0; i < n; ++i) na_exit_leaves(native, x.subspan(i * d, d), out.subspan(i * M, M));
        break;
      case Impl::kQs:
        for (std::size_t i = 0; i < n; ++i) qs_exit_leaves(qs, x.subspan(i * d, d), out.subspan(i * M, M), s.qs);
        break;
      case Impl::kVqs:
        batched_leaves(simd::kLanes<F>, x, out, s, [&](std::span<const F> b, std::span<std::uint16_t> o) {
          vqs_exit_leaves_batch(qs, b, o, backend, s.vqs);
        });
        break;
      case Impl::kRs:
        batched_leaves(kRsLanes, x, out, s, [&](std::span<const F> b, std::span<std::uint16_t> o) {
          rs_exit_leaves_batch(rs, b, o, backend, s.rs);
        });
        break;
    }
  }

 private:
  template <class Fn>
  void batched_leaves(std::size_t v, std::span<const F> x, std::span<std::uint16_t> out,
                      Scratch& s, Fn&& fn) const {
    const std::size_t d = n_features();
    const std::size_t M = n_trees();
    const std::size_t n = x.size() / d;
    s.leaves.resize(v * M);
    for (std::size_t start = 0; start < n; start += v) {
      const std::size_t real = std::min(v, n - start);
      s.padded.assign(x.begin() + static_cast<std::ptrdiff_t>(start * d),
                      x.begin() + static_cast<std::ptrdiff_t>((start + real) * d));
      for (std::size_t p = real; p < v; ++p) {
        s.padded.insert(s.padded.end(), x.end() - static_cast<std::ptrdiff_t>(d), x.end());
      }
      fn(std::span<const F>(s.padded), std::span<std::uint16_t>(s.leaves));
      std::copy_n(s.leaves.begin(), real * M, out.begin() + static_cast<std::ptrdiff_t>(start * M));
    }
  }
};

template <FeatureType F, LeafType V, class T, class U>
Engine<F, V> build_engine(const BasicForest<T, U>& source,
                          std::optional<QuantizationSpec> quantization = std::nullopt,
                          bool merge = true) {
  Engine<F, V> e;
  e.forest = convert_forest<F, V>(source);
  e.native = build_native(e.forest);
  e.qs = build_qs_model<F, V>(e.forest, quantization);
  e.rs = build_rs_model(e.qs, merge);
  e.quantization = quantization;
  return e;
}

// Domains named split/leaf storage type.
using FloatEngine = Engine<float, double>;
using Q16Engine = Engine<std::int16_t, std::int32_t>;
using Q32Engine = Engine<std::int32_t, std::int32_t>;
using Q16SplitEngine = Engine<std::int16_t, double>;
using Q32SplitEngine = Engine<std::int32_t, double>;
using QLeafEngine = Engine<float, std::int32_t>;

using AnyEngine =
    std::variant<FloatEngine, Q16Engine, Q32Engine, Q16SplitEngine, Q32SplitEngine, QLeafEngine>;

AnyEngine make_engine(const Forest& forest, bool merge = true);
AnyEngine make_engine(const QuantizedForest& forest, bool merge = true);
AnyEngine make_engine(const ModelDocument& doc, bool merge = true);

// e.g. "float/float", "int16/int16", "int16/float".
std::string domain_name(const AnyEngine& engine);

// Dataset rows in the engine's feature domain: copied for float splits,
// quantized with the model's scale and narrowed otherwise.
template <FeatureType F>
std::vector<F> prepare_instances(const Dataset& data, const std::optional<QuantizationSpec>& q) {
  std::vector<F> out;
  out.reserve(data.features.size());
  if constexpr (std::is_same_v<F, float>) {
    out.assign(data.features.begin(), data.features.end());
  } else {
    if (!q || !q->splits) throw ArgumentError("integer features need a split quantization spec");
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      std::vector<std::int32_t> row;
      try {
        row = quantize_instance(data.row(i), q->scale, q->width);
      } catch (const Error& e) {
        throw OverflowError("row " + std::to_string(i) + ": " + e.what());
      }
      for (auto v : row) out.push_back(checked_cast<F>(v));
    }
  }
  return out;
}

}  // namespace qscorer
