#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "stabrace/fuzz.hpp"
#include "stabrace/parser.hpp"
#include "stabrace/reporter.hpp"
#include "stabrace/witness.hpp"

using namespace stabrace;

namespace {

Program load(const std::string& name) {
  std::ifstream in(std::string(STABRACE_FIXTURE_DIR) + "/" + name);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_program(buf.str());
}

void BM_AnalyzeFixture(benchmark::State& state, const char* name) {
  const Program p = load(name);
  for (auto _ : state) {
    auto rs = report(p, summarize_program(p), ReportMode::Strict);
    benchmark::DoNotOptimize(rs);
  }
}
BENCHMARK_CAPTURE(BM_AnalyzeFixture, dodo, "dodo.il");
BENCHMARK_CAPTURE(BM_AnalyzeFixture, burble, "burble.il");
BENCHMARK_CAPTURE(BM_AnalyzeFixture, wurble, "wurble.il");

void BM_WitnessDodo(benchmark::State& state) {
  const Program p = load("dodo.il");
  const auto rs = report(p, summarize_program(p), ReportMode::Strict);
  for (auto _ : state) {
    for (const RaceReport& r : rs) benchmark::DoNotOptimize(reconstruct(r, p));
  }
}
BENCHMARK(BM_WitnessDodo);

void BM_EnumerateTraces(benchmark::State& state) {
  const Program p = generate_program(program_seed(42, 3));
  EnumBounds b;
  b.loop_unroll = static_cast<unsigned>(state.range(0));
  std::size_t n = 0;
  for (auto _ : state) {
    n = 0;
    for (const MethodName& m : p.order)
      n += enumerate_traces(p, p.method(m).body, universal_config(p.fields()), b).size();
  }
  state.counters["traces"] = static_cast<double>(n);
}
BENCHMARK(BM_EnumerateTraces)->Arg(1)->Arg(2);

void BM_CheckFuzzProgram(benchmark::State& state) {
  FuzzOptions opts;
  opts.shrink = false;
  std::size_t i = 0;
  for (auto _ : state) {
    const Program p = generate_program(program_seed(42, i++ % 200), opts.gen);
    benchmark::DoNotOptimize(check_program(p, opts));
  }
}
BENCHMARK(BM_CheckFuzzProgram);

}  // namespace
