#include <doctest.h>

#include <random>
#include <sstream>

#include "coda/errors.hpp"
#include "coda/profile.hpp"
#include "coda/stride.hpp"
#include "coda/synth.hpp"
#include "coda/trace.hpp"

using namespace coda;
using kmodel::AccessExpr;
using kmodel::Expr;
using kmodel::KernelSpec;
using kmodel::LoopSpec;

namespace {

KernelSpec kmeans_small() {
    KernelSpec k;
    k.name = "kmeans";
    k.grid = {4, 1};
    k.block = {4, 1};
    k.params["nfeatures"] = 2;
    k.objects.push_back({"features", 4, 4ull * 4 * 2, true});
    AccessExpr a;
    a.object = "features";
    a.index = Expr::parse("(blockIdx.x*blockDim.x + threadIdx.x)*nfeatures + i");
    a.loop = LoopSpec{"i", Expr::parse("nfeatures")};
    k.accesses.push_back(std::move(a));
    k.validate();
    return k;
}

// Independent footprint measurement straight off the trace.
struct Measured {
    std::uint64_t min_off = 0, max_off = 0;
    bool any = false;
};

Measured measure(const KernelSpec& k, std::uint32_t block) {
    Measured m;
    for (const auto& e : kmodel::gen_trace(k, block)) {
        if (!m.any) {
            m.min_off = m.max_off = e.byte_offset;
            m.any = true;
        } else {
            m.min_off = std::min(m.min_off, e.byte_offset);
            m.max_off = std::max(m.max_off, e.byte_offset);
        }
    }
    return m;
}

} // namespace

TEST_CASE("trace enumerates every access of every thread") {
    const auto k = kmeans_small();
    const auto t0 = kmodel::gen_trace(k, 0);
    REQUIRE(t0.size() == 8);
    std::set<std::uint64_t> elems;
    for (const auto& e : t0) elems.insert(e.element_index);
    for (std::uint64_t i = 0; i < 8; ++i) CHECK(elems.count(i) == 1);

    KernelSpec empty = k;
    empty.accesses.clear();
    CHECK(kmodel::gen_trace(empty, 0).empty());

    CHECK_THROWS_AS(kmodel::gen_trace(k, 99), TraceError);
}

TEST_CASE("trace errors name the expression and thread") {
    KernelSpec k;
    k.grid = {2, 1};
    k.block = {2, 1};
    k.objects.push_back({"buf", 4, 2, true});
    AccessExpr a;
    a.object = "buf";
    a.index = Expr::parse("blockIdx.x*blockDim.x + threadIdx.x");
    k.accesses.push_back(a);
    k.validate();
    try {
        kmodel::gen_trace(k, 1);
        FAIL("expected TraceError");
    } catch (const TraceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("blockIdx.x") != std::string::npos);
        CHECK(msg.find("thread") != std::string::npos);
    }
}

TEST_CASE("trace determinism") {
    const auto k = kmeans_small();
    std::ostringstream a, b;
    for (std::uint32_t blk = 0; blk < k.total_blocks(); ++blk) {
        kmodel::write_trace_csv(a, k, kmodel::gen_trace(k, blk));
        kmodel::write_trace_csv(b, k, kmodel::gen_trace(k, blk));
    }
    CHECK(a.str() == b.str());
}

TEST_CASE("analyzer agrees with the executor on a randomized affine corpus") {
    std::mt19937_64 rng(1234);
    int regular_seen = 0;
    for (int trial = 0; trial < 40; ++trial) {
        KernelSpec k;
        k.grid = {static_cast<std::uint32_t>(2 + rng() % 6), 1};
        k.block = {static_cast<std::uint32_t>(1 + rng() % 8),
                   static_cast<std::uint32_t>(1 + rng() % 3)};
        const std::int64_t cb = rng() % 40;        // block coefficient
        const std::int64_t ctx = rng() % 7;        // threadIdx.x coefficient
        const std::int64_t cty = rng() % 5;
        const std::int64_t ci = rng() % 4;
        const std::int64_t trips = 1 + rng() % 5;
        const std::int64_t c0 = rng() % 16;
        k.params["trips"] = trips;

        std::string idx = "blockIdx.x*" + std::to_string(cb) + " + threadIdx.x*" +
                          std::to_string(ctx) + " + threadIdx.y*" + std::to_string(cty) +
                          " + i*" + std::to_string(ci) + " + " + std::to_string(c0);
        AccessExpr a;
        a.object = "buf";
        a.index = Expr::parse(idx);
        a.loop = LoopSpec{"i", Expr::parse("trips")};

        // Size the object to cover the maximum reachable index.
        const std::uint64_t max_idx = cb * (k.grid.x - 1) + ctx * (k.block.x - 1) +
                                      cty * (k.block.y - 1) + ci * (trips - 1) + c0;
        k.objects.push_back({"buf", 4, max_idx + 1, true});
        k.accesses.push_back(std::move(a));
        k.validate();

        const auto r = kmodel::analyze_stride(k, k.accesses[0]);
        REQUIRE(r.regular);
        ++regular_seen;

        std::int64_t prev_min = 0;
        for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
            const auto m = measure(k, b);
            REQUIRE(m.any);
            const std::uint64_t extent = m.max_off - m.min_off + 4;
            CHECK(extent == r.per_block_bytes);
            if (b == 0) CHECK(static_cast<std::int64_t>(m.min_off) == r.base_offset);
            if (b > 0)
                CHECK(static_cast<std::int64_t>(m.min_off) - prev_min == r.block_stride);
            prev_min = static_cast<std::int64_t>(m.min_off);
        }
    }
    CHECK(regular_seen == 40);
}

TEST_CASE("profile classifies block-exclusive, broadcast and mixed kernels") {
    SystemShape shape{4, 1, 1};

    // Disjoint page-sized footprints: every page touched by exactly one block.
    const auto excl = synth::block_exclusive(8, 256, 4);
    const auto layout_e = kmodel::build_layout({excl}, 4096);
    const auto he = kmodel::profile(excl, layout_e, shape);
    REQUIRE(he.pages.size() == 8);
    for (const auto& p : he.pages) CHECK(p.blocks.size() == 1);
    CHECK(he.by_block_count().at(1) == 8);

    // Broadcast: every page touched by all blocks.
    const auto bc = synth::broadcast(8, 64, 2048);
    const auto layout_b = kmodel::build_layout({bc}, 4096);
    const auto hb = kmodel::profile(bc, layout_b, shape);
    REQUIRE(hb.pages.size() == 2);
    for (const auto& p : hb.pages) CHECK(p.blocks.size() == 8);
    CHECK(hb.pages_touched_by_all() == 2);

    // Mixed: one exclusive object + one broadcast object of equal size.
    KernelSpec mixed = synth::block_exclusive(8, 256, 4);
    mixed.name = "mixed";
    mixed.params["rounds"] = 8192 / 256;
    mixed.objects.push_back({"table", 4, 8192, true});
    AccessExpr shared;
    shared.object = "table";
    shared.index = Expr::parse("threadIdx.x + i*blockDim.x");
    shared.loop = LoopSpec{"i", Expr::parse("rounds")};
    mixed.accesses.push_back(std::move(shared));
    mixed.validate();
    const auto layout_m = kmodel::build_layout({mixed}, 4096);
    const auto hm = kmodel::profile(mixed, layout_m, shape);
    const auto buckets = hm.by_block_count();
    CHECK(buckets.at(1) == 8);
    CHECK(buckets.at(8) == 8);

    // Histogram conservation: distinct (page, block) pairs match the buckets.
    std::uint64_t from_buckets = 0;
    for (const auto& [nblocks, pages] : buckets) from_buckets += nblocks * pages;
    CHECK(from_buckets == hm.distinct_pairs());
}

TEST_CASE("estimate_regularity on worked examples") {
    const std::vector<std::uint64_t> uniform{4, 4, 4, 4};
    const auto u = kmodel::estimate_regularity(uniform);
    CHECK(u.mu == doctest::Approx(4));
    CHECK(u.sigma == doctest::Approx(0));
    CHECK(u.cv == doctest::Approx(0));

    const std::vector<std::uint64_t> two{1, 3};
    const auto t = kmodel::estimate_regularity(two);
    CHECK(t.mu == doctest::Approx(2));
    CHECK(t.sigma == doctest::Approx(1));
    CHECK(t.cv == doctest::Approx(0.5));

    const std::vector<std::uint64_t> zeros{0, 0};
    CHECK_THROWS_AS(kmodel::estimate_regularity(zeros), ConfigError);
    CHECK_THROWS_AS(kmodel::estimate_regularity(std::vector<std::uint64_t>{}), ConfigError);
}

TEST_CASE("csr generator hits its target cv and page-aligned communities") {
    for (double cv : {0.1, 1.0, 3.0}) {
        synth::CsrParams p;
        p.group_count = 420;
        p.group_size = 8;
        p.threads = 64;
        p.mean_elems = 128;
        p.cv = cv;
        const auto k = synth::csr_graph(p);
        std::vector<std::uint64_t> counts;
        for (std::uint32_t b = 0; b < k.total_blocks(); ++b)
            counts.push_back(k.accesses[0].ranged->elem_count[b]);
        const auto est = kmodel::estimate_regularity(counts);
        CHECK(est.cv == doctest::Approx(cv).epsilon(0.25));
        // Offsets of group boundaries stay page-aligned (1024 elements).
        for (std::uint32_t g = 0; g < p.group_count; ++g)
            CHECK(k.accesses[0].ranged->start_elem[g * p.group_size] % 1024 == 0);
    }
}
