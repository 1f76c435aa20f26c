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

#include <string>
#include <string_view>
#include <variant>

#include "qscorer/forest.hpp"
#include "qscorer/quantize.hpp"

namespace qscorer {

// JSON exchange format:
//   {"n_features", "n_classes", "comparison": "leq"|"lt",
//    "task": "ranking"|"classification", "weights": [..]|null,
//    "trees": [{"nodes": [{"id","feature","threshold","left","right"} |
//                         {"id","leaf": [..]}]}]}
// Node ids index the node list and id 0 is the root. Weights, if present,
// are folded into the leaves on load.
Forest parse_forest(std::string_view document);
std::string serialize_forest(const Forest& forest);

// Same schema plus "quantization": {"scale","width","splits","leaves"};
// quantized fields are integers.
QuantizedForest parse_quantized_forest(std::string_view document);
std::string serialize_quantized_forest(const QuantizedForest& forest);

using ModelDocument = std::variant<Forest, QuantizedForest>;

// Dispatches on the presence of the "quantization" key.
ModelDocument parse_model_document(std::string_view document);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace qscorer
