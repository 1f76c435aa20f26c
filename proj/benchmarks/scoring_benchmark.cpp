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

// Microbenchmarks of the scoring kernels on synthetic forests. The CLI's
// `bench` subcommand is the end-to-end harness; these isolate the kernels.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "qscorer/engine.hpp"
#include "random_forest.hpp"

namespace {

using namespace qscorer;

struct Setup {
  FloatEngine f;
  Q16Engine q;
  std::vector<float> xf;
  std::vector<std::int16_t> xq;
};

// M trees with exactly L leaves over 64 features, 4096 instances.
const Setup& setup(std::size_t trees, std::size_t leaves) {
  static std::map<std::pair<std::size_t, std::size_t>, Setup> cache;
  auto it = cache.find({trees, leaves});
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(trees * 1000 + leaves);
  testing::ForestShape shape;
  shape.n_trees = trees;
  shape.max_leaves = leaves;
  shape.exact_leaves = true;
  shape.n_features = 64;
  shape.grid = 1024;
  const auto forest = testing::random_forest(rng, shape);
  const QuantizationSpec spec{std::int64_t{1} << 15, 16, true, true};
  Setup s;
  s.f = build_engine<float, double>(forest);
  s.q = build_engine<std::int16_t, std::int32_t>(
      std::get<QForestSplitsLeaves>(quantize_forest(forest, spec).model), spec);
  s.xf = testing::random_instances(rng, 4096, shape.n_features, shape.grid);
  for (float v : s.xf) s.xq.push_back(static_cast<std::int16_t>(quantize_value(v, spec.scale, 16)));
  return cache.emplace(std::make_pair(trees, leaves), std::move(s)).first->second;
}

template <class E, class F>
void run(benchmark::State& state, const E& engine, const std::vector<F>& x) {
  const Impl impl = static_cast<Impl>(state.range(2));
  const std::size_t n = x.size() / engine.n_features();
  std::vector<typename E::accum_type> out(n * engine.n_classes());
  typename E::Scratch scratch;
  for (auto _ : state) {
    engine.score(impl, std::span<const F>(x), std::span<typename E::accum_type>(out), scratch);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
  state.SetLabel(std::string(impl_name(impl)));
}

void BM_ScoreFloat(benchmark::State& state) {
  const auto& s = setup(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  run(state, s.f, s.xf);
}

void BM_ScoreInt16(benchmark::State& state) {
  const auto& s = setup(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  run(state, s.q, s.xq);
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int trees : {100, 1000}) {
    for (int leaves : {32, 64}) {
      for (Impl impl : {Impl::kNa, Impl::kQs, Impl::kVqs, Impl::kRs}) {
        b->Args({trees, leaves, static_cast<int>(impl)});
      }
    }
  }
  b->ArgNames({"trees", "leaves", "impl"});
}

BENCHMARK(BM_ScoreFloat)->Apply(shapes)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ScoreInt16)->Apply(shapes)->Unit(benchmark::kMicrosecond);

void BM_FindLeafBatch(benchmark::State& state) {
  const auto leaves = static_cast<std::size_t>(state.range(0));
  const auto backend = state.range(1) ? Backend::kScalar : Backend::kSimd;
  std::mt19937_64 rng(1);
  std::vector<TransposedLeafIdx> blocks;
  for (int i = 0; i < 256; ++i) {
    std::vector<LeafBitvector> v;
    for (std::size_t l = 0; l < kRsLanes; ++l) {
      LeafBitvector b(leaves);
      b.set(rng() % leaves);
      v.push_back(b);
    }
    blocks.push_back(TransposedLeafIdx::from_bitvectors(v));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_leaf_index_batch(blocks[i++ % blocks.size()], backend));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kRsLanes));
}
BENCHMARK(BM_FindLeafBatch)->ArgsProduct({{32, 64, 256}, {0, 1}})->ArgNames({"leaves", "scalar"});

}  // namespace

BENCHMARK_MAIN();
