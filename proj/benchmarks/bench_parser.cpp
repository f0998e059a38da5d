#include <benchmark/benchmark.h>

#include <string>

#include "confusion_lens/ast.hpp"

namespace {

std::string method_body(std::size_t statements) {
  std::string out = "class A {\n  int f(int V1, int V2) {\n";
  for (std::size_t i = 0; i < statements; ++i) {
    out += "    if (V1 > " + std::to_string(i) + ") { V2 += (V1++ & 0x3F) * 2; } else V1 = V2-- % 7;\n";
  }
  out += "    return V1 + V2;\n  }\n}\n";
  return out;
}

void BM_ParseJava(benchmark::State& state) {
  const std::string source = method_body(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(confusion_lens::java::parse(source));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(source.size()));
}
BENCHMARK(BM_ParseJava)->Arg(4)->Arg(64)->Arg(512);

}  // namespace
