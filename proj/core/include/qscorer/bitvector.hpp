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

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

#include "qscorer/errors.hpp"

namespace qscorer {

// One bit per leaf of a tree, up to 256 leaves. Leaf j is bit j % 8 of byte
// j / 8 (least significant first); as 64-bit words, leaf j is bit j % 64 of
// word j / 64. Bits at positions >= n_leaves are zero.
class LeafBitvector {
 public:
  static constexpr std::size_t kMaxWords = 4;

  LeafBitvector() = default;
  explicit LeafBitvector(std::size_t n_leaves);

  // All bits 0..n_leaves-1 set.
  static LeafBitvector ones(std::size_t n_leaves);
  static LeafBitvector from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_leaves);
  static LeafBitvector from_words(std::span<const std::uint64_t> words, std::size_t n_leaves);

  std::size_t n_leaves() const noexcept { return n_leaves_; }
  std::size_t n_bytes() const noexcept { return (n_leaves_ + 7) / 8; }
  std::size_t n_words() const noexcept { return (n_leaves_ + 63) / 64; }

  bool test(std::size_t j) const noexcept { return (words_[j / 64] >> (j % 64)) & 1u; }
  void set(std::size_t j) noexcept { words_[j / 64] |= std::uint64_t{1} << (j % 64); }
  void reset(std::size_t j) noexcept { words_[j / 64] &= ~(std::uint64_t{1} << (j % 64)); }

  std::uint8_t byte(std::size_t m) const noexcept {
    return static_cast<std::uint8_t>(words_[m / 8] >> (8 * (m % 8)));
  }
  void set_byte(std::size_t m, std::uint8_t value) noexcept;

  std::span<const std::uint64_t> words() const noexcept { return {words_.data(), n_words()}; }

  LeafBitvector& operator&=(const LeafBitvector& other) noexcept;
  bool any() const noexcept;
  std::size_t popcount() const noexcept;

  friend bool operator==(const LeafBitvector&, const LeafBitvector&) = default;

 private:
  std::array<std::uint64_t, kMaxWords> words_{};
  std::size_t n_leaves_ = 0;
};

// Lowest set bit over little-endian words; -1 if all zero.
inline std::ptrdiff_t first_set_bit(const std::uint64_t* words, std::size_t n_words) noexcept {
  for (std::size_t w = 0; w < n_words; ++w) {
    if (words[w] != 0) return static_cast<std::ptrdiff_t>(w * 64 + std::countr_zero(words[w]));
  }
  return -1;
}

// Index of the exit leaf: the smallest j with bit j set. Throws
// InvariantError on an all-zero vector.
std::size_t exit_leaf_index(const LeafBitvector& v);
std::size_t exit_leaf_index(std::span<const std::uint64_t> words);
std::size_t exit_leaf_index(std::span<const std::uint8_t> bytes);

}  // namespace qscorer
