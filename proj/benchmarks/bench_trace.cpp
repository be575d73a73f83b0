#include <benchmark/benchmark.h>

#include "coda/synth.hpp"
#include "coda/stride.hpp"
#include "coda/trace.hpp"

static void BM_gen_trace(benchmark::State& state) {
    const auto k = coda::synth::block_exclusive(64, 256, 4);
    std::uint32_t block = 0;
    std::uint64_t entries = 0;
    for (auto _ : state) {
        entries += coda::kmodel::gen_trace(k, block).size();
        block = (block + 1) % k.total_blocks();
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(entries));
}
BENCHMARK(BM_gen_trace);

static void BM_analyze_stride(benchmark::State& state) {
    const auto k = coda::synth::block_exclusive(64, 256, 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(coda::kmodel::analyze_stride(k, k.accesses[0]));
}
BENCHMARK(BM_analyze_stride);
