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

#include <string>

#include "qscorer/rapidscorer.hpp"

namespace qscorer {

Epitome encode_epitome(const LeafBitvector& mask) {
  const auto full = LeafBitvector::ones(mask.n_leaves());
  const std::size_t n = mask.n_bytes();
  std::size_t first = n;
  std::size_t last = 0;
  for (std::size_t m = 0; m < n; ++m) {
    if (mask.byte(m) != full.byte(m)) {
      if (first == n) first = m;
      last = m;
    }
  }
  if (first == n) throw ArgumentError("an all-ones mask has no epitome");
  Epitome e;
  e.offset = static_cast<std::uint8_t>(first);
  for (std::size_t m = first; m <= last; ++m) e.bytes.push_back(mask.byte(m));
  return e;
}

LeafBitvector expand_epitome(const Epitome& epitome, std::size_t n_leaves) {
  auto out = LeafBitvector::ones(n_leaves);
  if (epitome.offset + epitome.bytes.size() > out.n_bytes()) {
    throw ArgumentError("epitome extends past the bitvector");
  }
  const auto full = out;
  for (std::size_t r = 0; r < epitome.bytes.size(); ++r) {
    const std::size_t m = epitome.offset + r;
    out.set_byte(m, static_cast<std::uint8_t>(epitome.bytes[r] & full.byte(m)));
  }
  return out;
}

TransposedLeafIdx::TransposedLeafIdx(std::size_t n_leaves)
    : n_leaves_(n_leaves), bytes_(((n_leaves + 7) / 8) * kRsLanes, 0) {
  if (n_leaves == 0 || n_leaves > kMaxLeaves) throw ArgumentError("leaf count out of range");
}

TransposedLeafIdx TransposedLeafIdx::from_bitvectors(std::span<const LeafBitvector> vectors) {
  if (vectors.size() != kRsLanes) throw ArgumentError("a transposed block holds 16 bitvectors");
  TransposedLeafIdx t(vectors[0].n_leaves());
  for (std::size_t l = 0; l < kRsLanes; ++l) {
    if (vectors[l].n_leaves() != t.n_leaves()) {
      throw ArgumentError("bitvectors of one block must share the leaf count");
    }
    for (std::size_t m = 0; m < t.rows(); ++m) t.at(m, l) = vectors[l].byte(m);
  }
  return t;
}

std::vector<LeafBitvector> TransposedLeafIdx::to_bitvectors() const {
  std::vector<LeafBitvector> out;
  out.reserve(kRsLanes);
  std::vector<std::uint8_t> column(rows());
  for (std::size_t l = 0; l < kRsLanes; ++l) {
    for (std::size_t m = 0; m < rows(); ++m) column[m] = at(m, l);
    out.push_back(LeafBitvector::from_bytes(column, n_leaves_));
  }
  return out;
}

void apply_epitome(const Epitome& epitome, TransposedLeafIdx& t,
                   const std::array<bool, kRsLanes>& lane_mask, Backend backend) {
  if (epitome.offset + epitome.bytes.size() > t.rows()) {
    throw ArgumentError("epitome rows fall outside the transposed block");
  }
  std::uint8_t lanes[kRsLanes];
  for (std::size_t l = 0; l < kRsLanes; ++l) lanes[l] = lane_mask[l] ? 0xFF : 0x00;
  std::uint8_t* base = t.data().data() + std::size_t{epitome.offset} * kRsLanes;
  if (backend == Backend::kSimd) {
    detail::apply_epitome_simd(base, epitome.bytes.data(), epitome.bytes.size(),
                               simd::load<simd::u8x16>(lanes));
  } else {
    detail::apply_epitome_scalar(base, epitome.bytes.data(), epitome.bytes.size(), lanes);
  }
}

std::array<std::uint16_t, kRsLanes> find_leaf_index_batch(const TransposedLeafIdx& t,
                                                          Backend backend) {
  std::uint8_t idx[kRsLanes];
  const bool ok = backend == Backend::kSimd ? detail::find_leaf_simd(t.data().data(), t.rows(), idx)
                                            : detail::find_leaf_scalar(t.data().data(), t.rows(), idx);
  if (!ok) throw InvariantError("a column of the transposed block has no set bit");
  std::array<std::uint16_t, kRsLanes> out{};
  for (std::size_t l = 0; l < kRsLanes; ++l) out[l] = idx[l];
  return out;
}

}  // namespace qscorer
