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

#include "qscorer/forest.hpp"

#include <cmath>

namespace qscorer {

void ValidationReport::add(Severity severity, std::string message, std::ptrdiff_t tree,
                           std::ptrdiff_t node) {
  if (severity == Severity::kError) ok = false;
  issues.push_back({severity, std::move(message), tree, node});
}

std::string ValidationReport::first_error() const {
  for (const auto& issue : issues) {
    if (issue.severity != Severity::kError) continue;
    std::string where;
    if (issue.tree >= 0) where += "tree " + std::to_string(issue.tree);
    if (issue.node >= 0) where += (where.empty() ? "" : ", ") + std::string("node ") +
                                  std::to_string(issue.node);
    return where.empty() ? issue.message : where + ": " + issue.message;
  }
  return {};
}

Forest fold_weights(const Forest& forest, std::span<const double> weights) {
  if (weights.size() != forest.trees.size()) {
    throw ArgumentError("expected " + std::to_string(forest.trees.size()) + " weights, got " +
                        std::to_string(weights.size()));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) {
      throw ArgumentError("weight " + std::to_string(i) + " is not finite");
    }
  }
  Forest out = forest;
  for (std::size_t i = 0; i < out.trees.size(); ++i) {
    for (auto& node : out.trees[i].nodes) {
      for (double& v : node.values) v *= weights[i];
    }
  }
  return out;
}

}  // namespace qscorer
