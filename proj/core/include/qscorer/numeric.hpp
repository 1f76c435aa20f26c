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

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <type_traits>

#include "qscorer/errors.hpp"

namespace qscorer {

// Feature/threshold element types supported by the scorers.
template <class T>
concept FeatureType = std::same_as<T, float> || std::same_as<T, std::int16_t> ||
                      std::same_as<T, std::int32_t>;

// Leaf value element types.
template <class V>
concept LeafType = std::same_as<V, double> || std::same_as<V, std::int32_t>;

// Scores accumulate in double for real leaves and in 64-bit integers for
// quantized leaves, so integer accumulation can never overflow for B <= 32.
template <class V>
using accum_t = std::conditional_t<std::is_floating_point_v<V>, double, std::int64_t>;

template <class T>
constexpr bool is_finite_value(T v) noexcept {
  if constexpr (std::is_floating_point_v<T>) {
    return std::isfinite(v);
  } else {
    return true;
  }
}

// Converts between element types. Integral narrowing is range-checked and
// real-to-integral conversion is rejected unless the value is integral.
template <class To, class From>
To checked_cast(From v) {
  if constexpr (std::is_same_v<To, From>) {
    return v;
  } else if constexpr (std::is_integral_v<To> && std::is_integral_v<From>) {
    if (v < static_cast<From>(std::numeric_limits<To>::min()) ||
        v > static_cast<From>(std::numeric_limits<To>::max())) {
      throw OverflowError("value " + std::to_string(v) + " does not fit " +
                          std::to_string(sizeof(To) * 8) + "-bit integer");
    }
    return static_cast<To>(v);
  } else if constexpr (std::is_integral_v<To>) {
    if (!std::isfinite(v) || std::floor(v) != v ||
        v < static_cast<From>(std::numeric_limits<To>::min()) ||
        v > static_cast<From>(std::numeric_limits<To>::max())) {
      throw ArgumentError("real value cannot be represented as integer");
    }
    return static_cast<To>(v);
  } else {
    return static_cast<To>(v);
  }
}

}  // namespace qscorer
