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

#include "qscorer/checksum.hpp"

#include <bit>
#include <cstdio>

namespace qscorer {

namespace {

constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kPrime = 0x100000001b3ull;

std::uint64_t fnv_word(std::uint64_t hash, std::uint64_t word) noexcept {
  for (int b = 0; b < 8; ++b) {
    hash ^= (word >> (8 * b)) & 0xFF;
    hash *= kPrime;
  }
  return hash;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string checksum_scores(std::span<const double> scores) {
  std::uint64_t h = kOffset;
  for (double s : scores) h = fnv_word(h, std::bit_cast<std::uint64_t>(s));
  return hex(h);
}

std::string checksum_scores(std::span<const std::int64_t> scores) {
  std::uint64_t h = kOffset;
  for (std::int64_t s : scores) h = fnv_word(h, static_cast<std::uint64_t>(s));
  return hex(h);
}

}  // namespace qscorer
