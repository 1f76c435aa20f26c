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

#include "qscorer/bitvector.hpp"

#include <string>

namespace qscorer {

LeafBitvector::LeafBitvector(std::size_t n_leaves) : n_leaves_(n_leaves) {
  if (n_leaves > kMaxWords * 64) {
    throw UnsupportedError("leaf bitvectors hold at most 256 leaves, got " +
                           std::to_string(n_leaves));
  }
}

LeafBitvector LeafBitvector::ones(std::size_t n_leaves) {
  LeafBitvector v(n_leaves);
  for (std::size_t w = 0; w < v.n_words(); ++w) {
    const std::size_t bits = n_leaves - w * 64;
    v.words_[w] = bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  }
  return v;
}

LeafBitvector LeafBitvector::from_bytes(std::span<const std::uint8_t> bytes,
                                        std::size_t n_leaves) {
  LeafBitvector v(n_leaves);
  if (bytes.size() != v.n_bytes()) throw ArgumentError("byte count does not match n_leaves");
  for (std::size_t m = 0; m < bytes.size(); ++m) v.set_byte(m, bytes[m]);
  v &= ones(n_leaves);
  return v;
}

LeafBitvector LeafBitvector::from_words(std::span<const std::uint64_t> words,
                                        std::size_t n_leaves) {
  LeafBitvector v(n_leaves);
  if (words.size() < v.n_words()) throw ArgumentError("word count does not match n_leaves");
  for (std::size_t w = 0; w < v.n_words(); ++w) v.words_[w] = words[w];
  v &= ones(n_leaves);
  return v;
}

void LeafBitvector::set_byte(std::size_t m, std::uint8_t value) noexcept {
  const std::size_t shift = 8 * (m % 8);
  auto& w = words_[m / 8];
  w = (w & ~(std::uint64_t{0xFF} << shift)) | (std::uint64_t{value} << shift);
}

LeafBitvector& LeafBitvector::operator&=(const LeafBitvector& other) noexcept {
  for (std::size_t w = 0; w < kMaxWords; ++w) words_[w] &= other.words_[w];
  return *this;
}

bool LeafBitvector::any() const noexcept {
  for (auto w : words_) {
    if (w) return true;
  }
  return false;
}

std::size_t LeafBitvector::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::size_t exit_leaf_index(const LeafBitvector& v) { return exit_leaf_index(v.words()); }

std::size_t exit_leaf_index(std::span<const std::uint64_t> words) {
  const auto j = first_set_bit(words.data(), words.size());
  if (j < 0) throw InvariantError("leaf bitvector has no set bit");
  return static_cast<std::size_t>(j);
}

std::size_t exit_leaf_index(std::span<const std::uint8_t> bytes) {
  for (std::size_t m = 0; m < bytes.size(); ++m) {
    if (bytes[m] != 0) return m * 8 + static_cast<std::size_t>(std::countr_zero(bytes[m]));
  }
  throw InvariantError("leaf bitvector has no set bit");
}

}  // namespace qscorer
