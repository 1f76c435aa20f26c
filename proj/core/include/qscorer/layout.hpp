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
#include <span>

#include "qscorer/errors.hpp"

namespace qscorer {

// Lane-parallel scorers emit class-major blocks:
//   s(0,0), s(1,0), ..., s(n-1,0), s(0,1), ..., s(n-1,C-1)
// while the scalar scorers emit instance-major blocks:
//   s(0,0), ..., s(0,C-1), s(1,0), ..., s(n-1,C-1)
template <class T>
void deinterleave(std::span<const T> class_major, std::size_t n, std::size_t n_classes,
                  std::span<T> instance_major) {
  if (class_major.size() < n * n_classes || instance_major.size() < n * n_classes) {
    throw ArgumentError("deinterleave: buffers smaller than n x C");
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) instance_major[i * n_classes + c] = class_major[c * n + i];
  }
}

// Row-major n x d instances to feature-major lanes: out[k * n + i] = x_i[k].
template <class T>
void transpose_to_lanes(std::span<const T> rows, std::size_t n, std::size_t d, std::span<T> out) {
  if (rows.size() < n * d || out.size() < n * d) {
    throw ArgumentError("transpose_to_lanes: buffers smaller than n x d");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) out[k * n + i] = rows[i * d + k];
  }
}

}  // namespace qscorer
