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

#include "qscorer/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qscorer {
namespace {

constexpr std::int64_t kMaxScale = std::int64_t{1} << 53;

void check_spec(const QuantizationSpec& spec) {
  if (spec.scale < 1 || spec.scale > kMaxScale) {
    throw ArgumentError("scale must be in [1, 2^53]");
  }
  if (spec.width != 16 && spec.width != 32) throw ArgumentError("width must be 16 or 32");
}

template <class T2, class V2>
BasicForest<T2, V2> quantize_as(const Forest& src, const QuantizationSpec& spec) {
  BasicForest<T2, V2> out;
  out.n_features = src.n_features;
  out.n_classes = src.n_classes;
  out.comparison = src.comparison;
  out.task = src.task;
  out.trees.reserve(src.trees.size());
  for (std::size_t t = 0; t < src.trees.size(); ++t) {
    const auto& tree = src.trees[t];
    BasicTree<T2, V2> qt;
    qt.n_leaves = tree.n_leaves;
    qt.nodes.reserve(tree.nodes.size());
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const auto& node = tree.nodes[n];
      auto where = [&] {
        return "tree " + std::to_string(t) + ", node " + std::to_string(n) + ": ";
      };
      BasicNode<T2, V2> q;
      q.leaf = node.leaf;
      q.feature = node.feature;
      q.left = node.left;
      q.right = node.right;
      q.leaf_index = node.leaf_index;
      try {
        if (!node.leaf) {
          if constexpr (std::is_integral_v<T2>) {
            q.threshold = quantize_value(node.threshold, spec.scale, spec.width);
          } else {
            q.threshold = node.threshold;
          }
        }
        q.values.reserve(node.values.size());
        for (double v : node.values) {
          if constexpr (std::is_integral_v<V2>) {
            q.values.push_back(quantize_value(v, spec.scale, spec.width));
          } else {
            q.values.push_back(v);
          }
        }
      } catch (const OverflowError& e) {
        throw OverflowError(where() + e.what());
      }
      qt.nodes.push_back(std::move(q));
    }
    out.trees.push_back(std::move(qt));
  }
  return out;
}

}  // namespace

std::size_t QuantizedForest::n_trees() const {
  return std::visit([](const auto& f) { return f.trees.size(); }, model);
}
std::size_t QuantizedForest::n_features() const {
  return std::visit([](const auto& f) { return f.n_features; }, model);
}
std::size_t QuantizedForest::n_classes() const {
  return std::visit([](const auto& f) { return f.n_classes; }, model);
}

std::int64_t quantize_value(double x, std::int64_t scale) {
  if (!std::isfinite(x)) throw ArgumentError("cannot quantize a non-finite value");
  if (scale < 1 || scale > kMaxScale) throw ArgumentError("scale must be in [1, 2^53]");
  const double s = static_cast<double>(scale);
  const double product = s * x;
  if (!(std::fabs(product) < 9.2e18)) {
    throw OverflowError("quantized value of " + std::to_string(x) + " exceeds 64 bits");
  }
  double f = std::floor(product);
  // The product may have rounded up onto an integer; fma recovers the sign of
  // the exact s*x - f.
  if (std::fma(s, x, -f) < 0.0) f -= 1.0;
  return static_cast<std::int64_t>(f);
}

std::int32_t quantize_value(double x, std::int64_t scale, int width) {
  if (width != 16 && width != 32) throw ArgumentError("width must be 16 or 32");
  const std::int64_t q = quantize_value(x, scale);
  if (!fits_width(q, width)) {
    throw OverflowError("quantized value " + std::to_string(q) + " of " + std::to_string(x) +
                        " does not fit signed " + std::to_string(width) + "-bit");
  }
  return static_cast<std::int32_t>(q);
}

std::int64_t choose_scale(const Forest& forest, int width) {
  if (width != 16 && width != 32) throw ArgumentError("width must be 16 or 32");
  const auto m = static_cast<std::int64_t>(forest.trees.size());
  if (m < 1) throw ArgumentError("forest has no trees");

  auto feasible = [&](std::int64_t s) {
    std::vector<std::int64_t> hi(forest.n_classes, 0);
    std::vector<std::int64_t> lo(forest.n_classes, 0);
    for (const auto& tree : forest.trees) {
      for (const auto& node : tree.nodes) {
        if (!node.leaf) {
          if (!fits_width(quantize_value(node.threshold, s), width)) return false;
          continue;
        }
        for (std::size_t c = 0; c < node.values.size() && c < forest.n_classes; ++c) {
          const std::int64_t q = quantize_value(node.values[c], s);
          hi[c] = std::max(hi[c], q);
          lo[c] = std::min(lo[c], q);
        }
      }
    }
    for (std::size_t c = 0; c < forest.n_classes; ++c) {
      // m * q must stay within [min, max]; compare by division to avoid overflow.
      if (hi[c] > width_max(width) / m) return false;
      if (lo[c] < width_min(width) / m) return false;
    }
    return true;
  };

  for (int k = width; k >= 0; --k) {
    const std::int64_t s = std::int64_t{1} << k;
    if (s < m) break;
    try {
      if (feasible(s)) return s;
    } catch (const OverflowError&) {
      // value beyond 64 bits at this scale; try a smaller one
    }
  }
  throw InfeasibleError("no power-of-two scale in [M, 2^" + std::to_string(width) +
                        "] fits signed " + std::to_string(width) + "-bit words; widen B");
}

QuantizedForest quantize_forest(const Forest& forest, const QuantizationSpec& spec) {
  check_spec(spec);
  QuantizedForest out;
  out.spec = spec;
  if (spec.splits && spec.leaves) {
    out.model = quantize_as<std::int32_t, std::int32_t>(forest, spec);
  } else if (spec.splits) {
    out.model = quantize_as<std::int32_t, double>(forest, spec);
  } else if (spec.leaves) {
    out.model = quantize_as<float, std::int32_t>(forest, spec);
  } else {
    out.model = forest;
  }
  return out;
}

std::vector<std::int32_t> quantize_instance(std::span<const float> x, std::int64_t scale,
                                            int width) {
  std::vector<std::int32_t> out;
  out.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    try {
      out.push_back(quantize_value(x[j], scale, width));
    } catch (const OverflowError& e) {
      throw OverflowError("feature " + std::to_string(j) + ": " + e.what());
    } catch (const ArgumentError& e) {
      throw ArgumentError("feature " + std::to_string(j) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qscorer
