#include <benchmark/benchmark.h>

#include "coda/scenario.hpp"
#include "coda/synth.hpp"

using namespace coda;

static void BM_run_policy(benchmark::State& state) {
    const auto k = synth::block_exclusive(64, 256, 4);
    const SystemShape shape{4, 1, 1};
    const auto policy = state.range(0) ? scenario::Policy::Coda : scenario::Policy::FgpOnly;

    sim::RunInput in;
    in.workload.name = "bench";
    in.workload.kernels = {k};
    const auto layout = kmodel::build_layout(in.workload.kernels, 4096);
    const auto setup = scenario::setup_policy(policy, in.workload.kernels, layout, shape);
    in.plan = setup.plan;
    in.sched_policy = setup.sched_policy;
    in.net = sim::NetworkModel::from_gbps(256, 128, 16, 1.0, 4);
    in.shape = shape;
    in.mapping.total_bytes = 256ull << 20;

    for (auto _ : state) benchmark::DoNotOptimize(sim::run(in));
}
BENCHMARK(BM_run_policy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
