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
#include <variant>
#include <vector>

#include "qscorer/forest.hpp"

namespace qscorer {

// Fixed-point map q(x) = floor(scale * x) stored in signed `width`-bit words.
struct QuantizationSpec {
  std::int64_t scale = 1;
  int width = 16;       // 16 or 32
  bool splits = true;   // quantize thresholds (and hence instances)
  bool leaves = true;   // quantize leaf values

  friend bool operator==(const QuantizationSpec&, const QuantizationSpec&) = default;
};

// The four split/leaf combinations. Quantized parts are held as int32 no
// matter the width; scorers narrow to int16 storage where width is 16.
using QForestSplitsLeaves = BasicForest<std::int32_t, std::int32_t>;
using QForestSplits = BasicForest<std::int32_t, double>;
using QForestLeaves = BasicForest<float, std::int32_t>;

struct QuantizedForest {
  QuantizationSpec spec;
  std::variant<QForestSplitsLeaves, QForestSplits, QForestLeaves, Forest> model;

  std::size_t n_trees() const;
  std::size_t n_features() const;
  std::size_t n_classes() const;
};

constexpr std::int64_t width_min(int width) noexcept { return -(std::int64_t{1} << (width - 1)); }
constexpr std::int64_t width_max(int width) noexcept { return (std::int64_t{1} << (width - 1)) - 1; }
constexpr bool fits_width(std::int64_t v, int width) noexcept {
  return v >= width_min(width) && v <= width_max(width);
}

// floor(scale * x), rounded toward negative infinity and exact even when the
// double product rounds. Requires 1 <= scale <= 2^53.
std::int64_t quantize_value(double x, std::int64_t scale);

// As above, but throws OverflowError unless the result fits `width` bits.
std::int32_t quantize_value(double x, std::int64_t scale, int width);

// Largest power of two s >= M (and <= 2^width) such that every quantized
// threshold fits `width` bits and M * (extreme quantized leaf value) stays in
// range for every class. Throws InfeasibleError when no such s exists.
std::int64_t choose_scale(const Forest& forest, int width);

QuantizedForest quantize_forest(const Forest& forest, const QuantizationSpec& spec);

std::vector<std::int32_t> quantize_instance(std::span<const float> x, std::int64_t scale,
                                            int width);

}  // namespace qscorer
