#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "confusion_lens/stats.hpp"

namespace {

std::vector<confusion_lens::ClusterPoint> points(std::size_t n) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<confusion_lens::ClusterPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i);
    out.push_back({"c" + std::to_string(i / 5), x, x + 10 * noise(rng)});
  }
  return out;
}

void BM_ClusteredBootstrap(benchmark::State& state) {
  const auto data = points(static_cast<std::size_t>(state.range(0)));
  confusion_lens::BootstrapOptions opts;
  opts.replicates = 1000;
  opts.jobs = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_lens::clustered_bootstrap_spearman(data, opts));
  }
}
BENCHMARK(BM_ClusteredBootstrap)->Args({100, 1})->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_Wilcoxon(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.3, 1.0);
  std::vector<double> d(static_cast<std::size_t>(state.range(0)));
  for (auto& v : d) v = noise(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_lens::wilcoxon_signed_rank(d));
  }
}
BENCHMARK(BM_Wilcoxon)->Arg(12)->Arg(72)->Arg(10000);

}  // namespace
