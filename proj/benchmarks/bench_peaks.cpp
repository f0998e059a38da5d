#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "confusion_lens/peaks.hpp"

namespace {

std::vector<double> random_signal(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  std::vector<double> s(n);
  for (auto& v : s) v = dist(rng);
  return s;
}

void BM_FindPeaks(benchmark::State& state) {
  const auto signal = random_signal(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_lens::find_peaks(signal, 0.8));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FindPeaks)->RangeMultiplier(8)->Range(64, 32768);

}  // namespace
