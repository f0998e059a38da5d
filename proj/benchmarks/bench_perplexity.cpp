#include <benchmark/benchmark.h>

#include <string>

#include "confusion_lens/ngram.hpp"
#include "confusion_lens/perplexity.hpp"

namespace {

std::string java_text(std::size_t lines) {
  std::string out;
  for (std::size_t i = 0; i < lines; ++i) {
    out += "int V" + std::to_string(i) + " = V" + std::to_string(i / 2) + " * 3 + " +
           std::to_string(i % 7) + ";\n";
  }
  return out;
}

void BM_NgramScore(benchmark::State& state) {
  confusion_lens::NgramModel model(3);
  model.train(java_text(200));
  const std::string source = java_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.score(source));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(source.size()));
}
BENCHMARK(BM_NgramScore)->Arg(10)->Arg(100)->Arg(1000);

void BM_AvgPerplexity(benchmark::State& state) {
  confusion_lens::NgramModel model(3);
  model.train(java_text(50));
  const auto records = model.score(java_text(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_lens::avg_perplexity(records));
  }
}
BENCHMARK(BM_AvgPerplexity)->Arg(10)->Arg(1000);

}  // namespace
