#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "coda/errors.hpp"
#include "coda/sched.hpp"

using namespace coda;
using sched::SchedulerPolicy;

namespace {

sched::DurationFn uniform(double d) {
    return [d](std::uint32_t, std::uint32_t) { return d; };
}

} // namespace

TEST_CASE("affinity equation worked values") {
    const SystemShape shape24{4, 4, 6}; // N_blocks_per_stack = 24
    CHECK(sched::affinity(0, shape24) == 0);
    CHECK(sched::affinity(25, shape24) == 1);
    CHECK(sched::affinity(96, shape24) == 0);

    // T = 96 blocks: exactly T/N per stack.
    std::map<std::uint32_t, int> count;
    for (std::uint64_t b = 0; b < 96; ++b) ++count[sched::affinity(b, shape24)];
    for (std::uint32_t s = 0; s < 4; ++s) CHECK(count[s] == 24);
}

TEST_CASE("hand schedule: 8 equal blocks on 4 stacks at 2 blocks per stack") {
    const SystemShape shape{4, 1, 2}; // N_blocks_per_stack = 2, one SM per stack
    const auto events = sched::dispatch(SchedulerPolicy::Affinity, 8, uniform(1.0), shape);
    REQUIRE(events.size() == 8);
    for (const auto& e : events) CHECK(e.stack == e.block / 2);
    CHECK(sched::makespan(events) == doctest::Approx(2.0));
}

TEST_CASE("single block lands on stack 0 under both policies") {
    const SystemShape shape{4, 2, 2};
    for (auto pol : {SchedulerPolicy::Affinity, SchedulerPolicy::BaselineAnyAvailable}) {
        const auto events = sched::dispatch(pol, 1, uniform(3.0), shape);
        REQUIRE(events.size() == 1);
        CHECK(events[0].stack == 0);
        CHECK(events[0].start == 0.0);
        CHECK(events[0].end == 3.0);
    }
}

TEST_CASE("affinity partition and work conservation") {
    const SystemShape shape{4, 2, 3};
    std::mt19937_64 rng(5);
    std::vector<double> durations(100);
    for (auto& d : durations) d = 1 + static_cast<double>(rng() % 50);
    auto fn = [&](std::uint32_t b, std::uint32_t) { return durations[b]; };

    const auto events = sched::dispatch(SchedulerPolicy::Affinity, 100, fn, shape);
    REQUIRE(events.size() == 100);
    std::set<std::uint32_t> seen;
    for (const auto& e : events) {
        CHECK(e.stack == sched::affinity(e.block, shape));
        CHECK(e.end >= e.start);
        CHECK(seen.insert(e.block).second); // no block runs twice
    }
}

TEST_CASE("baseline never loses to affinity on uniform durations") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const SystemShape shape{static_cast<std::uint32_t>(2 + (rng() % 3)),
                                static_cast<std::uint32_t>(1 + rng() % 3),
                                static_cast<std::uint32_t>(1 + rng() % 4)};
        const std::uint32_t blocks = 1 + static_cast<std::uint32_t>(rng() % 200);
        const double base = sched::makespan(
            sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, blocks, uniform(2.0), shape));
        const double aff = sched::makespan(
            sched::dispatch(SchedulerPolicy::Affinity, blocks, uniform(2.0), shape));
        CHECK(base <= aff + 1e-9);
    }
}

TEST_CASE("baseline stays within the Graham bound of affinity on random durations") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const SystemShape shape{4, static_cast<std::uint32_t>(1 + rng() % 2),
                                static_cast<std::uint32_t>(1 + rng() % 3)};
        const std::uint32_t blocks = 8 + static_cast<std::uint32_t>(rng() % 64);
        std::vector<double> d(blocks);
        for (auto& x : d) x = 1 + static_cast<double>(rng() % 100);
        auto fn = [&](std::uint32_t b, std::uint32_t) { return d[b]; };
        const double base = sched::makespan(
            sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, blocks, fn, shape));
        const double aff =
            sched::makespan(sched::dispatch(SchedulerPolicy::Affinity, blocks, fn, shape));
        CHECK(base <= 2.0 * aff + 1e-9);
    }
}

TEST_CASE("oversubscription hides the affinity restriction; tiny grids expose it") {
    const SystemShape shape{4, 4, 6}; // 16 SMs, N_blocks_per_stack = 24

    const std::uint32_t oversub = 100 * 4 * 24;
    const double base_big = sched::makespan(
        sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, oversub, uniform(1.0), shape));
    const double aff_big = sched::makespan(
        sched::dispatch(SchedulerPolicy::Affinity, oversub, uniform(1.0), shape));
    CHECK(aff_big / base_big <= 1.05);

    // 61 blocks on 16 SMs: affinity leaves one stack idle.
    const double base_sad = sched::makespan(
        sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, 61, uniform(1.0), shape));
    const double aff_sad = sched::makespan(
        sched::dispatch(SchedulerPolicy::Affinity, 61, uniform(1.0), shape));
    CHECK(aff_sad / base_sad > 1.05);
}

TEST_CASE("pinned dispatch keeps every block on one stack") {
    const SystemShape shape{4, 2, 1};
    const auto events =
        sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, 10, uniform(1.0), shape, 2);
    for (const auto& e : events) CHECK(e.stack == 2);
    CHECK(sched::makespan(events) == doctest::Approx(5.0));
}

TEST_CASE("dispatch is deterministic and rejects bad inputs") {
    const SystemShape shape{2, 2, 1};
    auto once = [&] {
        std::vector<std::uint64_t> sig;
        for (const auto& e :
             sched::dispatch(SchedulerPolicy::BaselineAnyAvailable, 17, uniform(2.0), shape))
            sig.push_back((std::uint64_t{e.block} << 32) | (e.stack << 16) | e.sm);
        return sig;
    };
    CHECK(once() == once());

    CHECK_THROWS_AS(sched::dispatch(SchedulerPolicy::Affinity, 0, uniform(1.0), shape),
                    ConfigError);
    CHECK_THROWS_AS(sched::dispatch(SchedulerPolicy::WorkStealing, 4, uniform(1.0), shape),
                    ConfigError);
    CHECK_THROWS_AS(sched::dispatch(SchedulerPolicy::Affinity, 4, uniform(1.0), shape, 9),
                    ConfigError);
}
