#include <benchmark/benchmark.h>

#include "coda/addrmap.hpp"

using namespace coda::addrmap;

static MappingConfig bench_cfg() {
    MappingConfig c;
    c.num_stacks = 4;
    c.page_size = 4096;
    c.fg_interleave = 128;
    c.total_bytes = 1ull << 30;
    return c;
}

static void BM_decode(benchmark::State& state) {
    const auto cfg = bench_cfg();
    const auto gran = state.range(0) ? Granularity::CGP : Granularity::FGP;
    std::uint64_t pa = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(decode(pa, gran, cfg));
        pa = (pa + 128) & (cfg.total_bytes - 1);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_decode)->Arg(0)->Arg(1);

static void BM_roundtrip(benchmark::State& state) {
    const auto cfg = bench_cfg();
    std::uint64_t pa = 0;
    for (auto _ : state) {
        const auto loc = decode(pa, Granularity::FGP, cfg);
        benchmark::DoNotOptimize(encode(loc, Granularity::FGP, cfg));
        pa = (pa + 4096 + 128) & (cfg.total_bytes - 1);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_roundtrip);
