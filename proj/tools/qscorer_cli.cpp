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

// qscorer: convert, quantize, verify and benchmark tree-ensemble models.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qscorer/bench.hpp"
#include "qscorer/dataset.hpp"
#include "qscorer/engine.hpp"
#include "qscorer/errors.hpp"
#include "qscorer/io.hpp"
#include "qscorer/quantize.hpp"
#include "qscorer/reports.hpp"
#include "qscorer/verify.hpp"

namespace {

using namespace qscorer;

struct DataArgs {
  std::string path;
  std::string format = "auto";
  std::string label_col;
  std::size_t n_features = 0;

  void add_to(CLI::App* app) {
    app->add_option("--data", path, "Dataset (CSV with header, or svmlight)")->required();
    app->add_option("--format", format, "Dataset format")
        ->check(CLI::IsMember({"auto", "csv", "svmlight"}));
    app->add_option("--label-col", label_col, "CSV label column, by name or 0-based index");
    app->add_option("--n-features", n_features, "svmlight dimensionality (default: max index + 1)");
  }

  Dataset load() const {
    LoadOptions opt;
    opt.format = format == "csv"        ? DataFormat::kCsv
                 : format == "svmlight" ? DataFormat::kSvmlight
                                        : DataFormat::kAuto;
    opt.label_col = label_col;
    opt.n_features = n_features;
    return load_dataset(path, opt);
  }
};

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

std::string describe(const ModelDocument& doc) {
  return std::visit(
      [](const auto& m) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Forest>) {
          return "float model: " + std::to_string(m.trees.size()) + " trees, " +
                 std::to_string(m.max_leaves()) + " max leaves, " + std::to_string(m.n_features) +
                 " features, " + std::to_string(m.n_classes) + " classes, " +
                 std::to_string(m.internal_nodes()) + " internal nodes";
        } else {
          return "quantized model: scale " + std::to_string(m.spec.scale) + ", width " +
                 std::to_string(m.spec.width) + ", splits " + (m.spec.splits ? "int" : "float") +
                 ", leaves " + (m.spec.leaves ? "int" : "float") + ", " +
                 std::to_string(m.n_trees()) + " trees";
        }
      },
      doc);
}

std::string serialize(const ModelDocument& doc) {
  return std::visit(
      [](const auto& m) -> std::string {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Forest>) {
          return serialize_forest(m);
        } else {
          return serialize_quantized_forest(m);
        }
      },
      doc);
}

int run_convert(const std::string& in, const std::string& out) {
  const auto doc = parse_model_document(read_text_file(in));
  const auto text = serialize(doc);
  // Parsing the canonical form must give it back unchanged.
  if (serialize(parse_model_document(text)) != text) {
    std::cerr << "error: canonical form does not round-trip\n";
    return 1;
  }
  std::cerr << describe(doc) << "\n";
  if (!out.empty()) write_text_file(out, text);
  return 0;
}

int run_quantize(const std::string& in, const std::string& out, const std::string& scale_arg,
                 int width, bool splits, bool leaves) {
  const auto forest = parse_forest(read_text_file(in));
  QuantizationSpec spec;
  spec.width = width;
  spec.splits = splits;
  spec.leaves = leaves;
  if (scale_arg == "auto") {
    spec.scale = choose_scale(forest, width);
    std::cerr << "chosen scale " << spec.scale << "\n";
  } else {
    std::size_t used = 0;
    spec.scale = std::stoll(scale_arg, &used);
    if (used != scale_arg.size() || spec.scale < 1) {
      throw ArgumentError("--scale must be a positive integer or 'auto', got '" + scale_arg + "'");
    }
  }
  const auto q = quantize_forest(forest, spec);
  std::cerr << describe(ModelDocument(q)) << "\n";
  write_text_file(out, serialize_quantized_forest(q));
  return 0;
}

int run_verify(const std::string& model, const DataArgs& data_args, const std::string& impls) {
  const auto engine = make_engine(parse_model_document(read_text_file(model)));
  const auto data = data_args.load();
  const auto list = parse_impl_list(impls);
  const auto report = verify_equivalence(engine, data, list);
  std::cout << report.summary() << "\n";
  if (report.ok) {
    std::cout << "checksum " << prediction_checksum(engine, data, Impl::kNaive) << "\n";
  }
  return report.ok ? 0 : 1;
}

int run_bench(const std::vector<std::string>& model_args, const DataArgs& data_args,
              BenchOptions opt, const std::string& out, const std::string& raw) {
  std::vector<BenchModel> models;
  for (const auto& arg : model_args) {
    // NAME=PATH, or PATH named by its file stem.
    const auto eq = arg.find('=');
    const std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
    const std::string name = eq == std::string::npos ? stem(arg) : arg.substr(0, eq);
    models.push_back({name, make_engine(parse_model_document(read_text_file(path)))});
  }
  const auto data = data_args.load();
  const auto report = run_benchmark(models, data, opt);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << report.to_table();
  if (!out.empty()) emit(report.to_csv(), out);
  if (!raw.empty()) emit(report.raw_csv(), raw);
  return 0;
}

int run_accuracy(const std::string& model, const DataArgs& data_args, std::int64_t scale,
                 int width, const std::string& out) {
  const auto forest = parse_forest(read_text_file(model));
  const auto data = data_args.load();
  if (scale == 0) scale = choose_scale(forest, width);
  const auto rows = accuracy_report(forest, data, scale, width);
  std::vector<std::vector<std::string>> t{{"variant", "accuracy_pct", "scale", "width"}};
  for (const auto& r : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * r.accuracy);
    t.push_back({r.variant, buf, std::to_string(scale), std::to_string(width)});
  }
  std::cout << format_table(t);
  if (!out.empty()) emit(format_csv(t), out);
  return 0;
}

int run_merge_stats(const std::string& model, std::int64_t scale, int width,
                    const std::string& out) {
  const auto forest = parse_forest(read_text_file(model));
  if (scale == 0) scale = choose_scale(forest, width);
  const auto s = merge_stats(forest, quantize_forest(forest, {scale, width, true, true}));
  auto pct = [](double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * f);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> t{
      {"model", "internal_nodes", "float_unique", "float_pct", "quantized_unique", "quantized_pct"},
      {stem(model), std::to_string(s.internal_nodes), std::to_string(s.float_unique),
       pct(s.float_fraction), std::to_string(s.quantized_unique), pct(s.quantized_fraction)}};
  std::cout << format_table(t);
  if (!out.empty()) emit(format_csv(t), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-ensemble scoring with QuickScorer, V-QuickScorer and RapidScorer"};
  app.require_subcommand(1);

  std::string in, out, raw;
  std::string model;

  auto* convert = app.add_subcommand("convert", "Validate a model document and write it back canonically");
  convert->add_option("model", in, "Model document")->required()->check(CLI::ExistingFile);
  convert->add_option("-o,--out", out, "Canonical output file");

  std::string scale_arg = "auto";
  int width = 16;
  bool splits = true, leaves = true;
  auto* quantize = app.add_subcommand("quantize", "Fixed-point quantize a float model");
  quantize->add_option("model", in, "Float model document")->required()->check(CLI::ExistingFile);
  quantize->add_option("-o,--out", out, "Quantized model document")->required();
  quantize->add_option("--scale", scale_arg, "Scale factor (positive integer) or 'auto'");
  quantize->add_option("--width", width, "Bit width")->check(CLI::IsMember({16, 32}));
  quantize->add_flag("--splits,!--no-splits", splits, "Quantize split thresholds (default on)");
  quantize->add_flag("--leaves,!--no-leaves", leaves, "Quantize leaf values (default on)");

  DataArgs verify_data;
  std::string impls = "naive,ie,na,qs,vqs,rs";
  auto* verify = app.add_subcommand("verify", "Check that every implementation agrees with the reference walk");
  verify->add_option("model", model, "Model document")->required()->check(CLI::ExistingFile);
  verify_data.add_to(verify);
  verify->add_option("--impls", impls, "Comma-separated: naive,ie,na,qs,vqs,rs");

  DataArgs bench_data;
  std::vector<std::string> bench_models;
  std::string bench_impls = "na,qs,vqs,rs";
  BenchOptions bopt;
  auto* bench = app.add_subcommand("bench", "Per-instance scoring latency");
  bench->add_option("--model", bench_models, "Model document, PATH or NAME=PATH (repeatable)")
      ->required();
  bench_data.add_to(bench);
  bench->add_option("--impls", bench_impls, "Comma-separated: naive,ie,na,qs,vqs,rs");
  bench->add_option("--warmup", bopt.warmup, "Discarded passes")->check(CLI::PositiveNumber);
  bench->add_option("--reps", bopt.reps, "Measured passes")->check(CLI::PositiveNumber);
  bench->add_option("--batch", bopt.batch, "Instances per scoring call (0: whole dataset)");
  bench->add_option("--threads", bopt.threads, "Worker threads (throughput mode)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "CSV report ('-' for stdout)");
  bench->add_option("--raw", raw, "Per-repetition CSV");

  DataArgs acc_data;
  std::int64_t scale = 0;
  auto* acc = app.add_subcommand("accuracy", "Accuracy of the four quantization variants");
  acc->add_option("model", model, "Float classification model")->required()->check(CLI::ExistingFile);
  acc_data.add_to(acc);
  acc->add_option("--scale", scale, "Scale factor (default: chosen automatically)");
  acc->add_option("--width", width, "Bit width")->check(CLI::IsMember({16, 32}));
  acc->add_option("--out", out, "CSV report");

  auto* merge = app.add_subcommand("merge-stats", "Unique (feature, threshold) fraction before and after quantization");
  merge->add_option("model", model, "Float model document")->required()->check(CLI::ExistingFile);
  merge->add_option("--scale", scale, "Scale factor (default: chosen automatically)");
  merge->add_option("--width", width, "Bit width")->check(CLI::IsMember({16, 32}));
  merge->add_option("--out", out, "CSV report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*convert) return run_convert(in, out);
    if (*quantize) return run_quantize(in, out, scale_arg, width, splits, leaves);
    if (*verify) return run_verify(model, verify_data, impls);
    if (*bench) {
      bopt.impls = parse_impl_list(bench_impls);
      return run_bench(bench_models, bench_data, bopt, out, raw);
    }
    if (*acc) return run_accuracy(model, acc_data, scale, width, out);
    if (*merge) return run_merge_stats(model, scale, width, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
