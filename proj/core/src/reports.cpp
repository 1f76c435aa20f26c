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

#include "qscorer/reports.hpp"

#include <algorithm>

namespace qscorer {

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (j) line += "  ";
      line += rows[i][j];
      if (j + 1 < rows[i].size()) line.append(width[j] - rows[i][j].size(), ' ');
    }
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t j = 0; j < width.size(); ++j) total += width[j] + (j ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

std::string format_csv(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      const auto& f = row[j];
      if (f.find_first_of(",\"\n") == std::string::npos) {
        out += f;
      } else {
        out += '"';
        for (char ch : f) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      }
    }
    out += '\n';
  }
  return out;
}

double accuracy(const AnyEngine& engine, const Dataset& data, Impl impl) {
  return std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        using F = typename E::feature_type;
        using A = typename E::accum_type;
        if (data.n_features != e.n_features()) {
          throw ArgumentError("dataset has " + std::to_string(data.n_features) +
                              " features, model expects " + std::to_string(e.n_features()));
        }
        if (data.n_rows == 0) throw ArgumentError("dataset is empty");
        const auto x = prepare_instances<F>(data, e.quantization);
        const std::size_t C = e.n_classes();
        std::vector<A> scores(data.n_rows * C);
        typename E::Scratch s;
        e.score(impl, std::span<const F>(x), std::span<A>(scores), s);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < data.n_rows; ++i) {
          const auto predicted = argmax_class(std::span<const A>(scores).subspan(i * C, C));
          if (static_cast<double>(predicted) == data.labels[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(data.n_rows);
      },
      engine);
}

std::vector<AccuracyRow> accuracy_report(const Forest& model, const Dataset& data,
                                         std::int64_t scale, int width) {
  if (model.task != Task::kClassification) {
    throw ArgumentError("accuracy needs a classification model");
  }
  std::vector<AccuracyRow> out;
  out.push_back({"float/float", accuracy(make_engine(model), data)});
  const struct {
    const char* name;
    bool splits;
    bool leaves;
  } variants[] = {{"float/int", false, true}, {"int/float", true, false}, {"int/int", true, true}};
  for (const auto& v : variants) {
    QuantizationSpec spec{scale, width, v.splits, v.leaves};
    out.push_back({v.name, accuracy(make_engine(quantize_forest(model, spec)), data)});
  }
  return out;
}

std::size_t unique_node_count(const AnyEngine& engine) {
  return std::visit([](const auto& e) { return e.rs.lists.unique_nodes(); }, engine);
}

double unique_node_fraction(const AnyEngine& engine) {
  return std::visit([](const auto& e) { return merge_nodes(e.qs, true).unique_fraction(); },
                    engine);
}

MergeStats merge_stats(const Forest& model, const QuantizedForest& quantized) {
  const auto f = make_engine(model, true);
  const auto q = make_engine(quantized, true);
  MergeStats s;
  s.internal_nodes = model.internal_nodes();
  s.float_unique = unique_node_count(f);
  s.quantized_unique = unique_node_count(q);
  s.float_fraction = unique_node_fraction(f);
  s.quantized_fraction = unique_node_fraction(q);
  return s;
}

}  // namespace qscorer
