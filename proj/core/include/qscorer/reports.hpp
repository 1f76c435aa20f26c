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
#include <string>
#include <vector>

#include "qscorer/dataset.hpp"
#include "qscorer/engine.hpp"
#include "qscorer/forest.hpp"
#include "qscorer/quantize.hpp"

namespace qscorer {

// Aligned plain-text table; the first row is the header.
std::string format_table(const std::vector<std::vector<std::string>>& rows);
std::string format_csv(const std::vector<std::vector<std::string>>& rows);

// argmax over one instance's class scores, ties to the lower class id.
template <class A>
std::size_t argmax_class(std::span<const A> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return best;
}

// Fraction of rows whose predicted class equals the integer label.
double accuracy(const AnyEngine& engine, const Dataset& data, Impl impl = Impl::kQs);

struct AccuracyRow {
  std::string variant;  // split/leaf: "float/float", "float/int", "int/float", "int/int"
  double accuracy = 0.0;
};

// Accuracy of the float model and of its three quantized variants at the
// given scale and width.
std::vector<AccuracyRow> accuracy_report(const Forest& model, const Dataset& data,
                                         std::int64_t scale, int width);

struct MergeStats {
  std::size_t internal_nodes = 0;
  std::size_t float_unique = 0;
  std::size_t quantized_unique = 0;
  double float_fraction = 1.0;
  double quantized_fraction = 1.0;
};

// Unique (feature, threshold) fraction of a model before and after quantization.
MergeStats merge_stats(const Forest& model, const QuantizedForest& quantized);
std::size_t unique_node_count(const AnyEngine& engine);
double unique_node_fraction(const AnyEngine& engine);

}  // namespace qscorer
