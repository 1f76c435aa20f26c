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
#include <optional>
#include <string>
#include <vector>

#include "qscorer/dataset.hpp"
#include "qscorer/engine.hpp"

namespace qscorer {

struct BenchModel {
  std::string name;
  AnyEngine engine;
};

struct BenchOptions {
  std::vector<Impl> impls{Impl::kNa, Impl::kQs};
  int warmup = 3;                 // discarded passes, at least 1
  int reps = 5;                   // measured passes, at least 1
  std::size_t batch = 0;          // instances per scoring call; 0 = whole dataset
  unsigned threads = 1;           // > 1 splits instances across workers
  double min_pass_seconds = 1e-3; // shorter passes are repeated inside one timing
};

struct BenchRow {
  std::string impl;
  std::string model;
  std::string dataset;
  std::string domain;
  std::size_t instances = 0;
  std::size_t batch = 0;
  int reps = 0;
  std::size_t inner = 1;  // dataset passes per timed repetition
  unsigned threads = 1;
  double us_per_instance = 0.0;  // median over reps
  std::optional<double> speedup; // NA-float time / this time
  std::string checksum;
  std::vector<double> pass_us;   // per-repetition per-instance latency
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::string> warnings;

  std::string to_csv() const;
  std::string to_table() const;
  // One line per (row, repetition) for external statistics.
  std::string raw_csv() const;
};

// Times every (model, impl) pair on the dataset. The speedup baseline is NA
// on the first float/float model; it is measured even if "na" is not listed.
BenchReport run_benchmark(const std::vector<BenchModel>& models, const Dataset& data,
                          const BenchOptions& options);

// Scores the dataset once and checksums the instance-major scores.
std::string prediction_checksum(const AnyEngine& engine, const Dataset& data, Impl impl);

}  // namespace qscorer
