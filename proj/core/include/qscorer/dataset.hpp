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
#include <string>
#include <string_view>
#include <vector>

namespace qscorer {

enum class DataFormat { kAuto, kCsv, kSvmlight };

// Dense N x d feature matrix, row-major, plus one label per row.
struct Dataset {
  std::string name;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<float> features;
  std::vector<double> labels;
  std::vector<std::string> feature_names;

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(features).subspan(i * n_features, n_features);
  }
};

struct LoadOptions {
  DataFormat format = DataFormat::kAuto;  // by extension: .csv, otherwise svmlight
  // CSV: label column by name or 0-based index. Empty picks "label" if the
  // header has it, else the last column.
  std::string label_col;
  // svmlight: dimensionality; 0 means max index + 1.
  std::size_t n_features = 0;
};

// Errors name the line (1-based) and column. NaN or infinite values are rejected.
Dataset parse_csv(std::string_view text, const std::string& label_col = {},
                  const std::string& name = "csv");
Dataset parse_svmlight(std::string_view text, std::size_t n_features = 0,
                       const std::string& name = "svmlight");
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});

}  // namespace qscorer
