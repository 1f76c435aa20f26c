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

#include "qscorer/verify.hpp"

#include <sstream>

namespace qscorer {

std::string VerifyReport::summary() const {
  std::ostringstream out;
  out << (ok ? "PASS" : "FAIL") << " domain=" << domain << " instances=" << instances << " impls=";
  for (std::size_t i = 0; i < impls.size(); ++i) out << (i ? "," : "") << impls[i];
  if (first) {
    out << "\n  first divergence: impl " << first->impl << ", instance " << first->instance;
    if (first->tree) out << ", tree " << *first->tree;
    if (first->klass) out << ", class " << *first->klass;
    out << ": " << first->detail;
  }
  return out.str();
}

VerifyReport verify_equivalence(const AnyEngine& engine, const Dataset& data,
                                std::span<const Impl> impls) {
  return std::visit(
      [&](const auto& e) {
        using F = typename std::decay_t<decltype(e)>::feature_type;
        if (data.n_features != e.n_features()) {
          throw ArgumentError("dataset has " + std::to_string(data.n_features) +
                              " features, model expects " + std::to_string(e.n_features()));
        }
        const auto x = prepare_instances<F>(data, e.quantization);
        auto report = verify_equivalence(e, std::span<const F>(x), impls);
        report.domain = domain_name(engine);
        return report;
      },
      engine);
}

}  // namespace qscorer
