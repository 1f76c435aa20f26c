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

#include "qscorer/engine.hpp"

#include <array>

namespace qscorer {

namespace {

constexpr std::array<std::pair<Impl, std::string_view>, 6> kNames{{
    {Impl::kNaive, "naive"},
    {Impl::kIe, "ie"},
    {Impl::kNa, "na"},
    {Impl::kQs, "qs"},
    {Impl::kVqs, "vqs"},
    {Impl::kRs, "rs"},
}};

}  // namespace

std::string_view impl_name(Impl impl) noexcept {
  for (const auto& [i, name] : kNames) {
    if (i == impl) return name;
  }
  return "?";
}

Impl parse_impl(std::string_view name) {
  for (const auto& [i, n] : kNames) {
    if (n == name) return i;
  }
  throw ArgumentError("unknown implementation '" + std::string(name) +
                      "' (expected naive, ie, na, qs, vqs or rs)");
}

std::vector<Impl> parse_impl_list(std::string_view list) {
  std::vector<Impl> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    const auto item = list.substr(start, end - start);
    if (!item.empty()) out.push_back(parse_impl(item));
    start = end + 1;
  }
  if (out.empty()) throw ArgumentError("empty implementation list");
  return out;
}

const std::vector<Impl>& all_impls() {
  static const std::vector<Impl> impls{Impl::kNaive, Impl::kIe, Impl::kNa,
                                       Impl::kQs,    Impl::kVqs, Impl::kRs};
  return impls;
}

AnyEngine make_engine(const Forest& forest, bool merge) {
  return build_engine<float, double>(forest, std::nullopt, merge);
}

AnyEngine make_engine(const QuantizedForest& q, bool merge) {
  const auto& spec = q.spec;
  const bool narrow = spec.width == 16;
  return std::visit(
      [&](const auto& f) -> AnyEngine {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, QForestSplitsLeaves>) {
          if (narrow) return build_engine<std::int16_t, std::int32_t>(f, spec, merge);
          return build_engine<std::int32_t, std::int32_t>(f, spec, merge);
        } else if constexpr (std::is_same_v<T, QForestSplits>) {
          if (narrow) return build_engine<std::int16_t, double>(f, spec, merge);
          return build_engine<std::int32_t, double>(f, spec, merge);
        } else if constexpr (std::is_same_v<T, QForestLeaves>) {
          return build_engine<float, std::int32_t>(f, spec, merge);
        } else {
          return build_engine<float, double>(f, spec, merge);
        }
      },
      q.model);
}

AnyEngine make_engine(const ModelDocument& doc, bool merge) {
  return std::visit([&](const auto& m) { return make_engine(m, merge); }, doc);
}

std::string domain_name(const AnyEngine& engine) {
  return std::visit(
      [](const auto& e) -> std::string {
        using E = std::decay_t<decltype(e)>;
        using F = typename E::feature_type;
        using V = typename E::leaf_type;
        const std::string width = e.quantization ? std::to_string(e.quantization->width) : "32";
        std::string split = std::is_same_v<F, float> ? "float" : "int" + std::to_string(sizeof(F) * 8);
        std::string leaf = std::is_same_v<V, double> ? "float" : "int" + width;
        return split + "/" + leaf;
      },
      engine);
}

}  // namespace qscorer
