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

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "qscorer/io.hpp"

namespace qscorer {
namespace {

using json = nlohmann::ordered_json;

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

std::int64_t int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) {
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

template <class T>
T number_as(const json& v, const std::string& where, const char* what) {
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ValidationError(where + ": " + what + " must be an integer");
    const auto i = v.get<std::int64_t>();
    if (i < std::numeric_limits<T>::min() || i > std::numeric_limits<T>::max()) {
      throw ValidationError(where + ": " + what + " out of range");
    }
    return static_cast<T>(i);
  } else {
    if (!v.is_number()) throw ValidationError(where + ": " + what + " must be a number");
    return static_cast<T>(v.get<double>());
  }
}

// Float threshold under which float comparisons agree with comparisons
// against the document's double: round down for <=, up for <.
float float_threshold(double t, Comparison cmp) {
  float f = static_cast<float>(t);
  if (cmp == Comparison::kLeq && static_cast<double>(f) > t) {
    f = std::nextafter(f, -std::numeric_limits<float>::infinity());
  } else if (cmp == Comparison::kLt && static_cast<double>(f) < t) {
    f = std::nextafter(f, std::numeric_limits<float>::infinity());
  }
  return f;
}

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model document: ") + e.what(), e.byte);
  }
}

struct Header {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  Comparison comparison = Comparison::kLeq;
  Task task = Task::kRanking;
};

Header parse_header(const json& doc) {
  Header h;
  const auto d = int_field(doc, "n_features", "model");
  const auto c = int_field(doc, "n_classes", "model");
  if (d <= 0) throw ValidationError("model: n_features must be positive");
  if (c <= 0) throw ValidationError("model: n_classes must be positive");
  h.n_features = static_cast<std::size_t>(d);
  h.n_classes = static_cast<std::size_t>(c);
  const json& cmp = field(doc, "comparison", "model");
  if (cmp == "leq") {
    h.comparison = Comparison::kLeq;
  } else if (cmp == "lt") {
    h.comparison = Comparison::kLt;
  } else {
    throw ValidationError("model: comparison must be \"leq\" or \"lt\"");
  }
  const json& task = field(doc, "task", "model");
  if (task == "ranking") {
    h.task = Task::kRanking;
  } else if (task == "classification") {
    h.task = Task::kClassification;
  } else {
    throw ValidationError("model: task must be \"ranking\" or \"classification\"");
  }
  return h;
}

template <class T, class V>
BasicForest<T, V> parse_trees(const json& doc, const Header& h) {
  BasicForest<T, V> forest;
  forest.n_features = h.n_features;
  forest.n_classes = h.n_classes;
  forest.comparison = h.comparison;
  forest.task = h.task;

  const json& trees = field(doc, "trees", "model");
  if (!trees.is_array()) throw ValidationError("model: 'trees' must be an array");
  forest.trees.reserve(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string tw = "tree " + std::to_string(t);
    const json& nodes = field(trees[t], "nodes", tw);
    if (!nodes.is_array() || nodes.empty()) {
      throw ValidationError(tw + ": 'nodes' must be a non-empty array");
    }
    BasicTree<T, V> tree;
    tree.nodes.resize(nodes.size());
    std::vector<std::uint8_t> filled(nodes.size(), 0);
    for (const json& jn : nodes) {
      const auto id = int_field(jn, "id", tw);
      const std::string nw = tw + ", node " + std::to_string(id);
      if (id < 0 || static_cast<std::size_t>(id) >= nodes.size()) {
        throw ValidationError(nw + ": id out of range");
      }
      if (filled[static_cast<std::size_t>(id)]) throw ValidationError(nw + ": duplicate id");
      filled[static_cast<std::size_t>(id)] = 1;
      auto& node = tree.nodes[static_cast<std::size_t>(id)];
      if (auto leaf = jn.find("leaf"); leaf != jn.end()) {
        if (!leaf->is_array()) throw ValidationError(nw + ": 'leaf' must be an array");
        node.leaf = true;
        node.values.reserve(leaf->size());
        for (const json& v : *leaf) node.values.push_back(number_as<V>(v, nw, "leaf value"));
      } else {
        node.leaf = false;
        const auto k = int_field(jn, "feature", nw);
        if (k < 0 || k > std::numeric_limits<std::int32_t>::max()) {
          throw ValidationError(nw + ": feature index out of range");
        }
        node.feature = static_cast<std::int32_t>(k);
        const json& thr = field(jn, "threshold", nw);
        if constexpr (std::is_same_v<T, float>) {
          node.threshold = float_threshold(number_as<double>(thr, nw, "threshold"), h.comparison);
        } else {
          node.threshold = number_as<T>(thr, nw, "threshold");
        }
        const auto left = int_field(jn, "left", nw);
        const auto right = int_field(jn, "right", nw);
        if (left < 0 || static_cast<std::size_t>(left) >= nodes.size() || right < 0 ||
            static_cast<std::size_t>(right) >= nodes.size()) {
          throw ValidationError(nw + ": child index out of range");
        }
        node.left = static_cast<std::int32_t>(left);
        node.right = static_cast<std::int32_t>(right);
      }
    }
    try {
      assign_leaf_indices(tree);
    } catch (const ValidationError& e) {
      throw ValidationError(tw + ": " + e.what());
    }
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

template <class F>
void check_valid(const F& forest) {
  const ValidationReport report = validate(forest);
  if (!report.ok) throw ValidationError(report.first_error());
}

template <class T, class V>
json trees_to_json(const BasicForest<T, V>& forest) {
  json trees = json::array();
  for (const auto& tree : forest.trees) {
    json nodes = json::array();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& node = tree.nodes[i];
      json jn = json::object();
      jn["id"] = i;
      if (node.leaf) {
        json values = json::array();
        for (const V& v : node.values) {
          if constexpr (std::is_floating_point_v<V>) {
            values.push_back(static_cast<double>(v));
          } else {
            values.push_back(static_cast<std::int64_t>(v));
          }
        }
        jn["leaf"] = std::move(values);
      } else {
        jn["feature"] = node.feature;
        if constexpr (std::is_floating_point_v<T>) {
          jn["threshold"] = static_cast<double>(node.threshold);
        } else {
          jn["threshold"] = static_cast<std::int64_t>(node.threshold);
        }
        jn["left"] = node.left;
        jn["right"] = node.right;
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  return trees;
}

template <class T, class V>
json header_to_json(const BasicForest<T, V>& forest) {
  json doc = json::object();
  doc["n_features"] = forest.n_features;
  doc["n_classes"] = forest.n_classes;
  doc["comparison"] = forest.comparison == Comparison::kLeq ? "leq" : "lt";
  doc["task"] = forest.task == Task::kRanking ? "ranking" : "classification";
  doc["weights"] = nullptr;
  return doc;
}

Forest parse_forest_json(const json& doc) {
  const Header h = parse_header(doc);
  Forest forest = parse_trees<float, double>(doc, h);
  if (auto w = doc.find("weights"); w != doc.end() && !w->is_null()) {
    if (!w->is_array()) throw ValidationError("model: 'weights' must be an array or null");
    std::vector<double> weights;
    for (const json& v : *w) weights.push_back(number_as<double>(v, "model", "weight"));
    try {
      forest = fold_weights(forest, weights);
    } catch (const ArgumentError& e) {
      throw ValidationError(std::string("model: ") + e.what());
    }
  }
  check_valid(forest);
  return forest;
}

QuantizedForest parse_quantized_json(const json& doc) {
  const json& q = field(doc, "quantization", "model");
  QuantizedForest out;
  out.spec.scale = int_field(q, "scale", "quantization");
  out.spec.width = static_cast<int>(int_field(q, "width", "quantization"));
  const json& splits = field(q, "splits", "quantization");
  const json& leaves = field(q, "leaves", "quantization");
  if (!splits.is_boolean() || !leaves.is_boolean()) {
    throw ValidationError("quantization: 'splits' and 'leaves' must be booleans");
  }
  out.spec.splits = splits.get<bool>();
  out.spec.leaves = leaves.get<bool>();
  if (out.spec.scale < 1) throw ValidationError("quantization: scale must be >= 1");
  if (out.spec.width != 16 && out.spec.width != 32) {
    throw ValidationError("quantization: width must be 16 or 32");
  }
  if (auto w = doc.find("weights"); w != doc.end() && !w->is_null()) {
    throw ValidationError("quantized model: weights must already be folded (null)");
  }
  const Header h = parse_header(doc);
  auto finish = [&](auto forest) {
    check_valid(forest);
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      for (std::size_t n = 0; n < forest.trees[t].nodes.size(); ++n) {
        const auto& node = forest.trees[t].nodes[n];
        auto check = [&](auto v) {
          if constexpr (std::is_integral_v<decltype(v)>) {
            if (!fits_width(v, out.spec.width)) {
              throw ValidationError("tree " + std::to_string(t) + ", node " + std::to_string(n) +
                                    ": value exceeds quantization width");
            }
          }
        };
        if (node.leaf) {
          for (auto v : node.values) check(v);
        } else {
          check(node.threshold);
        }
      }
    }
    out.model = std::move(forest);
  };
  if (out.spec.splits && out.spec.leaves) {
    finish(parse_trees<std::int32_t, std::int32_t>(doc, h));
  } else if (out.spec.splits) {
    finish(parse_trees<std::int32_t, double>(doc, h));
  } else if (out.spec.leaves) {
    finish(parse_trees<float, std::int32_t>(doc, h));
  } else {
    finish(parse_trees<float, double>(doc, h));
  }
  return out;
}

}  // namespace

Forest parse_forest(std::string_view document) {
  const json doc = parse_json(document);
  if (doc.is_object() && doc.contains("quantization")) {
    throw ValidationError("model: document is quantized; use parse_quantized_forest");
  }
  try {
    return parse_forest_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
}

std::string serialize_forest(const Forest& forest) {
  json doc = header_to_json(forest);
  doc["trees"] = trees_to_json(forest);
  return doc.dump() + "\n";
}

QuantizedForest parse_quantized_forest(std::string_view document) {
  const json doc = parse_json(document);
  try {
    return parse_quantized_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
}

std::string serialize_quantized_forest(const QuantizedForest& forest) {
  return std::visit(
      [&](const auto& model) {
        json doc = header_to_json(model);
        doc["quantization"] = json{{"scale", forest.spec.scale},
                                   {"width", forest.spec.width},
                                   {"splits", forest.spec.splits},
                                   {"leaves", forest.spec.leaves}};
        doc["trees"] = trees_to_json(model);
        return doc.dump() + "\n";
      },
      forest.model);
}

ModelDocument parse_model_document(std::string_view document) {
  const json doc = parse_json(document);
  try {
    if (doc.is_object() && doc.contains("quantization")) return parse_quantized_json(doc);
    return parse_forest_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ArgumentError("failed writing " + path);
}

}  // namespace qscorer
