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

// 128-bit lane types built on GCC/Clang vector extensions. The compiler maps
// them to SSE on x86-64 and NEON on AArch64; there is no ISA-specific code.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <type_traits>
#include <utility>

namespace qscorer {

// Lane kernels come in two implementations that must agree bit for bit.
enum class Backend : std::uint8_t { kSimd, kScalar };

namespace simd {

inline constexpr std::size_t kRegisterBytes = 16;

typedef float f32x4 __attribute__((vector_size(16)));
typedef std::int32_t i32x4 __attribute__((vector_size(16)));
typedef std::int16_t i16x8 __attribute__((vector_size(16)));
typedef std::int64_t i64x2 __attribute__((vector_size(16)));
typedef std::uint64_t u64x2 __attribute__((vector_size(16)));
typedef std::uint8_t u8x16 __attribute__((vector_size(16)));
typedef std::int8_t i8x16 __attribute__((vector_size(16)));

// Register type holding one feature value per lane, and its comparison mask.
template <class F>
struct Lanes;

template <>
struct Lanes<float> {
  using vec = f32x4;
  using mask = i32x4;
};
template <>
struct Lanes<std::int32_t> {
  using vec = i32x4;
  using mask = i32x4;
};
template <>
struct Lanes<std::int16_t> {
  using vec = i16x8;
  using mask = i16x8;
};

// Number of lanes of type F in one 128-bit register.
template <class F>
inline constexpr std::size_t kLanes = kRegisterBytes / sizeof(F);

template <class Vec>
inline Vec load(const void* p) noexcept {
  Vec v;
  std::memcpy(&v, p, sizeof(Vec));
  return v;
}

template <class Vec>
inline void store(void* p, Vec v) noexcept {
  std::memcpy(p, &v, sizeof(Vec));
}

template <class Vec, class T>
inline Vec broadcast(T x) noexcept {
  using E = std::remove_cvref_t<decltype(std::declval<Vec>()[0])>;
  return Vec{} + static_cast<E>(x);
}

// True if any lane is nonzero.
template <class Vec>
inline bool any(Vec v) noexcept {
  const u64x2 u = reinterpret_cast<u64x2>(v);
  return (u[0] | u[1]) != 0;
}

// Widens comparison masks (every lane 0 or all ones) by duplicating lanes,
// which for such masks equals sign extension.
inline void widen(i32x4 m, i64x2 out[2]) noexcept {
  out[0] = reinterpret_cast<i64x2>(__builtin_shuffle(m, i32x4{0, 0, 1, 1}));
  out[1] = reinterpret_cast<i64x2>(__builtin_shuffle(m, i32x4{2, 2, 3, 3}));
}

inline void widen(i16x8 m, i32x4 out[2]) noexcept {
  out[0] = reinterpret_cast<i32x4>(__builtin_shuffle(m, i16x8{0, 0, 1, 1, 2, 2, 3, 3}));
  out[1] = reinterpret_cast<i32x4>(__builtin_shuffle(m, i16x8{4, 4, 5, 5, 6, 6, 7, 7}));
}

// 16-bit lane masks to 64-bit lane masks: 16 -> 32 -> 64.
inline void widen(i16x8 m, i64x2 out[4]) noexcept {
  i32x4 mid[2];
  widen(m, mid);
  widen(mid[0], out);
  widen(mid[1], out + 2);
}

// Narrows 16 lanes worth of comparison masks into one byte per lane.
// Masks are 0 or all ones, so keeping the low byte of each lane is exact.
// Even-element shuffles lower to and+pack on plain SSE2.
inline u8x16 narrow_to_bytes(const i16x8 m[2]) noexcept {
  const auto a = reinterpret_cast<u8x16>(m[0]);
  const auto b = reinterpret_cast<u8x16>(m[1]);
  return __builtin_shuffle(a, b, u8x16{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30});
}

inline u8x16 narrow_to_bytes(const i32x4 m[4]) noexcept {
  const i16x8 even{0, 2, 4, 6, 8, 10, 12, 14};
  const i16x8 h[2] = {
      __builtin_shuffle(reinterpret_cast<i16x8>(m[0]), reinterpret_cast<i16x8>(m[1]), even),
      __builtin_shuffle(reinterpret_cast<i16x8>(m[2]), reinterpret_cast<i16x8>(m[3]), even)};
  return narrow_to_bytes(h);
}

}  // namespace simd
}  // namespace qscorer
