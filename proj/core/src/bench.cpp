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

#include "qscorer/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "qscorer/checksum.hpp"
#include "qscorer/reports.hpp"

namespace qscorer {

namespace {

using Clock = std::chrono::steady_clock;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class E>
class Runner {
 public:
  using F = typename E::feature_type;
  using A = typename E::accum_type;

  Runner(const E& engine, const Dataset& data, Impl impl, const BenchOptions& opt)
      : engine_(engine), impl_(impl), batch_(opt.batch), threads_(std::max(1u, opt.threads)) {
    if (data.n_features != engine.n_features()) {
      throw ArgumentError("dataset has " + std::to_string(data.n_features) +
                          " features, model expects " + std::to_string(engine.n_features()));
    }
    x_ = prepare_instances<F>(data, engine.quantization);
    n_ = data.n_rows;
    scores_.resize(n_ * engine.n_classes());
    scratch_.resize(threads_);
  }

  std::size_t instances() const noexcept { return n_; }
  std::size_t batch() const noexcept { return batch_ == 0 ? n_ : batch_; }

  // Scores the whole dataset once.
  void pass() {
    if (threads_ == 1) {
      run_range(0, n_, scratch_[0]);
      return;
    }
    std::vector<std::thread> pool;
    const std::size_t per = (n_ + threads_ - 1) / threads_;
    for (unsigned t = 0; t < threads_; ++t) {
      const std::size_t lo = std::min(n_, t * per);
      const std::size_t hi = std::min(n_, lo + per);
      pool.emplace_back([this, lo, hi, t] { run_range(lo, hi, scratch_[t]); });
    }
    for (auto& th : pool) th.join();
  }

  double time_passes(std::size_t inner) {
    const auto t0 = Clock::now();
    for (std::size_t i = 0; i < inner; ++i) pass();
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }

  std::string checksum() const { return checksum_scores(std::span<const A>(scores_)); }

 private:
  void run_range(std::size_t lo, std::size_t hi, typename E::Scratch& s) {
    const std::size_t d = engine_.n_features();
    const std::size_t C = engine_.n_classes();
    const std::size_t step = batch();
    for (std::size_t start = lo; start < hi; start += step) {
      const std::size_t count = std::min(step, hi - start);
      engine_.score(impl_, std::span<const F>(x_).subspan(start * d, count * d),
                    std::span<A>(scores_).subspan(start * C, count * C), s);
    }
  }

  const E& engine_;
  Impl impl_;
  std::size_t batch_;
  unsigned threads_;
  std::vector<F> x_;
  std::size_t n_ = 0;
  std::vector<A> scores_;
  std::vector<typename E::Scratch> scratch_;
};

BenchRow measure(const BenchModel& model, const Dataset& data, Impl impl,
                 const BenchOptions& opt, std::vector<std::string>& warnings) {
  if (opt.warmup < 1 || opt.reps < 1) throw ArgumentError("warmup and reps must be at least 1");
  return std::visit(
      [&](const auto& engine) {
        Runner runner(engine, data, impl, opt);
        BenchRow row;
        row.impl = impl_name(impl);
        row.model = model.name;
        row.dataset = data.name;
        row.domain = domain_name(model.engine);
        row.instances = runner.instances();
        row.batch = runner.batch();
        row.reps = opt.reps;
        row.threads = std::max(1u, opt.threads);
        if (row.instances == 0) throw ArgumentError("dataset is empty");
        for (int w = 0; w < opt.warmup; ++w) runner.pass();

        const double one = runner.time_passes(1);
        if (one < opt.min_pass_seconds) {
          row.inner = static_cast<std::size_t>(
              std::ceil(opt.min_pass_seconds / std::max(one, 1e-9)));
          warnings.push_back(row.impl + " on " + row.model + ": one pass took " +
                             fixed(one * 1e6, 1) + " us, below the timing threshold; repeating " +
                             std::to_string(row.inner) + " passes per measurement");
        }
        for (int r = 0; r < opt.reps; ++r) {
          const double t = runner.time_passes(row.inner);
          row.pass_us.push_back(t * 1e6 / static_cast<double>(row.inner * row.instances));
        }
        row.us_per_instance = median(row.pass_us);
        row.checksum = runner.checksum();
        return row;
      },
      model.engine);
}

}  // namespace

BenchReport run_benchmark(const std::vector<BenchModel>& models, const Dataset& data,
                          const BenchOptions& options) {
  BenchReport report;
  std::optional<double> baseline;
  const BenchModel* float_model = nullptr;
  for (const auto& m : models) {
    if (std::holds_alternative<FloatEngine>(m.engine)) {
      float_model = &m;
      break;
    }
  }
  for (const auto& m : models) {
    for (Impl impl : options.impls) {
      report.rows.push_back(measure(m, data, impl, options, report.warnings));
      if (&m == float_model && impl == Impl::kNa) baseline = report.rows.back().us_per_instance;
    }
  }
  if (float_model && !baseline) {
    std::vector<std::string> ignored;
    baseline = measure(*float_model, data, Impl::kNa, options, ignored).us_per_instance;
  }
  if (!float_model) report.warnings.push_back("no float model given; speedup column left empty");
  if (baseline) {
    for (auto& row : report.rows) {
      if (row.us_per_instance > 0) row.speedup = *baseline / row.us_per_instance;
    }
  }
  return report;
}

std::string BenchReport::to_csv() const {
  std::vector<std::vector<std::string>> t{{"impl", "model", "dataset", "domain", "instances",
                                           "batch", "reps", "inner", "threads",
                                           "us_per_instance", "speedup_vs_na_float", "checksum"}};
  for (const auto& r : rows) {
    t.push_back({r.impl, r.model, r.dataset, r.domain, std::to_string(r.instances),
                 std::to_string(r.batch), std::to_string(r.reps), std::to_string(r.inner),
                 std::to_string(r.threads), fixed(r.us_per_instance, 4),
                 r.speedup ? fixed(*r.speedup, 3) : "", r.checksum});
  }
  return format_csv(t);
}

std::string BenchReport::to_table() const {
  std::vector<std::vector<std::string>> t{
      {"impl", "model", "domain", "us/instance", "speedup", "checksum"}};
  bool ie = false;
  for (const auto& r : rows) {
    ie = ie || r.impl == "ie";
    t.push_back({r.impl, r.model, r.domain, fixed(r.us_per_instance, 3),
                 r.speedup ? "(" + fixed(*r.speedup, 2) + "x)" : "", r.checksum});
  }
  std::string out = format_table(t);
  out += "timing: steady clock, median of measured passes after warmup; speedup vs na on the "
         "float model\n";
  if (ie) out += "note: ie is a branching descent over node objects, not generated if-else code\n";
  return out;
}

std::string BenchReport::raw_csv() const {
  std::vector<std::vector<std::string>> t{
      {"impl", "model", "dataset", "domain", "rep", "us_per_instance"}};
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.pass_us.size(); ++i) {
      t.push_back({r.impl, r.model, r.dataset, r.domain, std::to_string(i), fixed(r.pass_us[i], 6)});
    }
  }
  return format_csv(t);
}

std::string prediction_checksum(const AnyEngine& engine, const Dataset& data, Impl impl) {
  return std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        using F = typename E::feature_type;
        using A = typename E::accum_type;
        if (data.n_features != e.n_features()) {
          throw ArgumentError("dataset has " + std::to_string(data.n_features) +
                              " features, model expects " + std::to_string(e.n_features()));
        }
        const auto x = prepare_instances<F>(data, e.quantization);
        std::vector<A> scores(data.n_rows * e.n_classes());
        typename E::Scratch s;
        e.score(impl, std::span<const F>(x), std::span<A>(scores), s);
        return checksum_scores(std::span<const A>(scores));
      },
      engine);
}

}  // namespace qscorer
