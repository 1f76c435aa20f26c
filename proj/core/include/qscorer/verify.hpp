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
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qscorer/dataset.hpp"
#include "qscorer/engine.hpp"

namespace qscorer {

struct Divergence {
  std::string impl;
  std::size_t instance = 0;
  std::optional<std::size_t> tree;    // set for exit-leaf mismatches
  std::optional<std::size_t> klass;   // set for score mismatches
  std::string detail;
};

struct VerifyReport {
  bool ok = true;
  std::string domain;
  std::size_t instances = 0;
  std::vector<std::string> impls;
  std::optional<Divergence> first;

  std::string summary() const;
};

// Relative score tolerance for float domains; integer scores must match exactly.
inline constexpr double kScoreRelTolerance = 1e-6;

template <class A>
bool scores_match(A reference, A value) noexcept {
  if constexpr (std::is_floating_point_v<A>) {
    if (reference == value) return true;
    const double scale = std::max(std::fabs(reference), std::fabs(value));
    return std::fabs(reference - value) <= kScoreRelTolerance * scale;
  } else {
    return reference == value;
  }
}

// Checks every implementation against the naive oracle: exit leaves exactly,
// scores per scores_match. Stops at the first divergence.
template <FeatureType F, LeafType V>
VerifyReport verify_equivalence(const Engine<F, V>& engine, std::span<const F> x,
                                std::span<const Impl> impls) {
  VerifyReport report;
  const std::size_t d = engine.n_features();
  const std::size_t M = engine.n_trees();
  const std::size_t C = engine.n_classes();
  const std::size_t n = x.size() / d;
  report.instances = n;
  typename Engine<F, V>::Scratch scratch;
  std::vector<std::uint16_t> ref_leaves(n * M), leaves(n * M);
  std::vector<accum_t<V>> ref_scores(n * C), scores(n * C);
  engine.exit_leaves(Impl::kNaive, x, std::span<std::uint16_t>(ref_leaves), scratch);
  engine.score(Impl::kNaive, x, std::span<accum_t<V>>(ref_scores), scratch);
  for (Impl impl : impls) {
    report.impls.emplace_back(impl_name(impl));
    engine.exit_leaves(impl, x, std::span<std::uint16_t>(leaves), scratch);
    for (std::size_t i = 0; i < n && report.ok; ++i) {
      for (std::size_t h = 0; h < M; ++h) {
        if (leaves[i * M + h] != ref_leaves[i * M + h]) {
          report.ok = false;
          report.first = Divergence{std::string(impl_name(impl)), i, h, std::nullopt,
                                    "exit leaf " + std::to_string(leaves[i * M + h]) +
                                        ", expected " + std::to_string(ref_leaves[i * M + h])};
          break;
        }
      }
    }
    if (!report.ok) return report;
    engine.score(impl, x, std::span<accum_t<V>>(scores), scratch);
    for (std::size_t i = 0; i < n && report.ok; ++i) {
      for (std::size_t c = 0; c < C; ++c) {
        const auto a = ref_scores[i * C + c];
        const auto b = scores[i * C + c];
        if (!scores_match(a, b)) {
          report.ok = false;
          report.first = Divergence{std::string(impl_name(impl)), i, std::nullopt, c,
                                    "score " + std::to_string(b) + ", expected " + std::to_string(a)};
          break;
        }
      }
    }
    if (!report.ok) return report;
  }
  return report;
}

// Prepares the dataset in the engine's domain, then verifies.
VerifyReport verify_equivalence(const AnyEngine& engine, const Dataset& data,
                                std::span<const Impl> impls);

}  // namespace qscorer
