#include <benchmark/benchmark.h>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "patret/cart.hpp"
#include "patret/dataset.hpp"
#include "patret/experiment.hpp"
#include "patret/measures.hpp"
#include "patret/noise.hpp"
#include "patret/pattern.hpp"
#include "patret/rng.hpp"

namespace {

using namespace patret;

// Mixed numeric/categorical records with a learnable class, so the miner
// grows a realistically sized tree instead of a single leaf.
Dataset synthetic_dataset(std::size_t rows, std::uint64_t seed) {
  auto schema = std::make_shared<const Schema>(
      Schema({{"x1", AttrKind::kNumeric},
              {"x2", AttrKind::kNumeric},
              {"c1", AttrKind::kCategorical},
              {"y", AttrKind::kCategorical}},
             "y"));
  const std::vector<std::string> categories = {"a", "b", "c"};
  CounterRng rng(CounterRng::derive_key(seed, {0x62656e63}));
  std::vector<Record> records;
  records.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const double x1 = rng.next_unit() * 100.0;
    const double x2 = rng.next_gaussian() * 10.0;
    const std::string& c1 = categories[rng.next_below(categories.size())];
    const bool flip = rng.next_unit() < 0.1;
    const bool signal = (x1 > 50.0) != (c1 == "b");
    records.push_back({{x1, x2, c1, std::string(signal != flip ? "y1" : "y0")}});
  }
  return Dataset(std::move(schema), std::move(records));
}

void BM_MinePatterns(benchmark::State& state) {
  const Dataset data = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 1);
  const MinerParams params{0.02, 12};
  for (auto _ : state) {
    PatternSet zs = mine_patterns(data, params);
    benchmark::DoNotOptimize(zs);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MinePatterns)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_PerturbUniform(benchmark::State& state) {
  const Dataset data = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    PerturbResult out = perturb(data, {NoiseKind::kUniform, 0.1, seed++});
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 3);
}
BENCHMARK(BM_PerturbUniform)->Arg(2000)->Arg(8000);

void BM_PerturbGaussian(benchmark::State& state) {
  const Dataset data = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 1);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    PerturbResult out = perturb(data, {NoiseKind::kGaussian, 0.1, seed++});
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 3);
}
BENCHMARK(BM_PerturbGaussian)->Arg(2000)->Arg(8000);

void BM_PatternMeasures(benchmark::State& state) {
  const Dataset d = synthetic_dataset(static_cast<std::size_t>(state.range(0)), 1);
  const PatternSet zs = mine_patterns(d, {0.02, 12});
  const Dataset m = perturb(d, {NoiseKind::kUniform, 0.1, 7}).data;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pattern_accuracy(zs, d, m).eq1);
    benchmark::DoNotOptimize(psd(zs, d, m));
    benchmark::DoNotOptimize(pld(zs, d, m, 5).pld);
  }
}
BENCHMARK(BM_PatternMeasures)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_Pearson(benchmark::State& state) {
  // 320 points matches a full sweep series: 16 noise levels x 2 folds x 10 repeats.
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  CounterRng rng(CounterRng::derive_key(3, {0x70727370}));
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = rng.next_unit();
    ys[i] = 0.4 * xs[i] + 0.1 * rng.next_gaussian();
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(pearson(xs, ys));
  }
}
BENCHMARK(BM_Pearson)->Arg(320);

void BM_ExperimentCell(benchmark::State& state) {
  // One sweep cell: mine on a fold, perturb it, evaluate every measure.
  const Dataset data = synthetic_dataset(2000, 1);
  const FoldPlan plan = stratified_folds(data, 2, 11);
  const auto [train, test] = split(data, plan, 0);
  const PatternSet zs = mine_patterns(train, {0.02, 12});
  const std::string positive = "y1";
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const Dataset noisy = perturb(train, {NoiseKind::kUniform, 0.1, seed++}).data;
    const PatternSet zm = mine_patterns(noisy, {0.02, 12});
    benchmark::DoNotOptimize(evaluate_measures(zs, train, noisy, &test, &positive, 5));
    benchmark::DoNotOptimize(prediction_accuracy(zm, test));
  }
}
BENCHMARK(BM_ExperimentCell)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
