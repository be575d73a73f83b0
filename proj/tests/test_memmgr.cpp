#include <doctest.h>

#include <bit>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "coda/errors.hpp"
#include "coda/memmgr.hpp"

using namespace coda;
using addrmap::Granularity;
using addrmap::MappingConfig;
using mem::GroupMode;
using mem::MemoryManager;

namespace {

MappingConfig small_cfg(std::uint64_t pages = 16) {
    MappingConfig c;
    c.num_stacks = 4;
    c.page_size = 4096;
    c.fg_interleave = 128;
    c.total_bytes = pages * c.page_size;
    return c;
}

} // namespace

TEST_CASE("alloc_fgp marks one group FGP and leaves its other pages free") {
    MemoryManager mm(small_cfg());
    const auto ptes = mm.alloc_fgp(0, 0, 1);
    REQUIRE(ptes.size() == 1);
    CHECK(ptes[0].granularity == Granularity::FGP);
    CHECK(ptes[0].valid);
    const auto& g = mm.group(ptes[0].ppn / 4);
    CHECK(g.mode == GroupMode::FGP);
    CHECK(mm.free_page_count() == 15);

    CHECK(mm.alloc_fgp(0, 100, 0).empty());
    CHECK(mm.free_page_count() == 15);
}

TEST_CASE("allocation beyond capacity fails without mutating state") {
    MemoryManager mm(small_cfg());
    CHECK_THROWS_AS(mm.alloc_fgp(0, 0, 17), CapacityError);
    CHECK(mm.free_page_count() == 16);
}

TEST_CASE("alloc_cgp pages decode entirely to the requested stack") {
    const auto cfg = small_cfg();
    MemoryManager mm(cfg);
    const auto ptes = mm.alloc_cgp(0, 0, 1, 2);
    REQUIRE(ptes.size() == 1);
    CHECK(ptes[0].granularity == Granularity::CGP);
    const std::uint64_t base = ptes[0].ppn * cfg.page_size;
    for (std::uint64_t off = 0; off < cfg.page_size; off += cfg.access_granularity)
        CHECK(addrmap::decode(base + off, Granularity::CGP, cfg).stack_id == 2);
}

TEST_CASE("one CGP page per stack consumes exactly one full group") {
    MemoryManager mm(small_cfg());
    for (std::uint32_t s = 0; s < 4; ++s) {
        const auto ptes = mm.alloc_cgp(0, s, 1, s);
        REQUIRE(ptes.size() == 1);
    }
    std::uint64_t cgp_groups = 0;
    for (std::uint64_t gi = 0; gi < mm.group_count(); ++gi) {
        const auto& g = mm.group(gi);
        if (g.mode == GroupMode::CGP) {
            ++cgp_groups;
            CHECK(g.used_mask == 0xF); // fully used, zero free pages on any stack
        }
    }
    CHECK(cgp_groups == 1);
}

TEST_CASE("invalid stack index is rejected") {
    MemoryManager mm(small_cfg());
    CHECK_THROWS_AS(mm.alloc_cgp(0, 0, 1, 99), ConfigError);
}

TEST_CASE("freeing the last page of a group resets its mode") {
    MemoryManager mm(small_cfg());
    const auto a = mm.alloc_cgp(0, 0, 1, 0);
    const auto b = mm.alloc_cgp(0, 1, 1, 1);
    const std::uint64_t gi = a[0].ppn / 4;
    REQUIRE(b[0].ppn / 4 == gi); // first-fit reuses the CGP group
    mm.free_pages(a);
    CHECK(mm.group(gi).mode == GroupMode::CGP); // one page still used
    mm.free_pages(b);
    CHECK(mm.group(gi).mode == GroupMode::Free);
    CHECK_THROWS_AS(mm.free_pages(b), InvariantError); // double free
}

TEST_CASE("translate composes with the page tables") {
    const auto cfg = small_cfg();
    MemoryManager mm(cfg);
    const auto first = mm.alloc_fgp(0, 0, 1);
    CHECK(first[0].ppn == 0);
    CHECK(mm.translate(0, 0) == std::pair<std::uint64_t, Granularity>{0, Granularity::FGP});

    const auto cg = mm.alloc_cgp(0, 5, 1, 3);
    std::uint32_t stack = addrmap::decode(cg[0].ppn * cfg.page_size, Granularity::CGP, cfg).stack_id;
    for (std::uint64_t off = 0; off < cfg.page_size; off += 512) {
        const auto [pa, gran] = mm.translate(5 * cfg.page_size + off, 0);
        CHECK(gran == Granularity::CGP);
        CHECK(addrmap::decode(pa, gran, cfg).stack_id == stack);
    }
    CHECK_THROWS_AS(mm.translate(9 * cfg.page_size, 0), PageFaultError);
    CHECK_THROWS_AS(mm.translate(0, 42), PageFaultError);
}

TEST_CASE("FGP pages span all stacks, CGP pages exactly one") {
    const auto cfg = small_cfg();
    MemoryManager mm(cfg);
    const auto f = mm.alloc_fgp(0, 0, 1);
    const auto c = mm.alloc_cgp(0, 1, 1, 1);
    std::set<std::uint32_t> fgp_stacks, cgp_stacks;
    for (std::uint64_t off = 0; off < cfg.page_size; off += cfg.access_granularity) {
        fgp_stacks.insert(
            addrmap::decode(f[0].ppn * cfg.page_size + off, Granularity::FGP, cfg).stack_id);
        cgp_stacks.insert(
            addrmap::decode(c[0].ppn * cfg.page_size + off, Granularity::CGP, cfg).stack_id);
    }
    CHECK(fgp_stacks.size() == cfg.num_stacks);
    CHECK(cgp_stacks.size() == 1);
}

TEST_CASE("random alloc/free interleaving keeps group invariants") {
    const auto cfg = small_cfg(64);
    MemoryManager mm(cfg);
    std::mt19937_64 rng(11);
    std::vector<std::vector<mem::PageTableEntry>> live;
    std::uint64_t next_vpn = 0;

    for (int op = 0; op < 1000; ++op) {
        const bool do_alloc = live.empty() || (rng() % 3) != 0;
        try {
            if (do_alloc) {
                const std::uint64_t n = 1 + rng() % 3;
                if (rng() & 1)
                    live.push_back(mm.alloc_fgp(0, next_vpn, n));
                else
                    live.push_back(mm.alloc_cgp(0, next_vpn, n, rng() % 4));
                next_vpn += n;
            } else {
                const std::size_t victim = rng() % live.size();
                mm.free_pages(live[victim]);
                live.erase(live.begin() + victim);
            }
        } catch (const CapacityError&) {
            // full is fine; invariants must still hold
        }

        std::uint64_t used = 0;
        for (std::uint64_t gi = 0; gi < mm.group_count(); ++gi) {
            const auto& g = mm.group(gi);
            if (g.mode == GroupMode::Free) CHECK(g.used_mask == 0);
            used += std::popcount(g.used_mask);
        }
        CHECK(used + mm.free_page_count() == mm.total_pages()); // capacity conservation
    }
}

TEST_CASE("allocation is deterministic for a fixed request sequence") {
    auto run_once = [] {
        MemoryManager mm(small_cfg(32));
        std::vector<std::uint64_t> ppns;
        for (auto& p : mm.alloc_fgp(0, 0, 3)) ppns.push_back(p.ppn);
        for (auto& p : mm.alloc_cgp(0, 3, 2, 1)) ppns.push_back(p.ppn);
        for (auto& p : mm.alloc_fgp(1, 0, 2)) ppns.push_back(p.ppn);
        return ppns;
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("request-based alloc dispatches on mode and validates target_stack") {
    MemoryManager mm(small_cfg());
    mem::AllocationRequest req;
    req.num_pages = 2;
    req.mode = Granularity::CGP;
    CHECK_THROWS_AS(mm.alloc(0, 0, req), ConfigError); // CGP needs target_stack
    req.target_stack = 1;
    const auto ptes = mm.alloc(0, 0, req);
    REQUIRE(ptes.size() == 2);
    for (const auto& p : ptes) CHECK(p.granularity == Granularity::CGP);

    mem::AllocationRequest bad;
    bad.num_pages = 1;
    bad.mode = Granularity::FGP;
    bad.target_stack = 0; // only valid for CGP
    CHECK_THROWS_AS(mm.alloc(0, 8, bad), ConfigError);
}

TEST_CASE("allocator state dump names groups and modes") {
    MemoryManager mm(small_cfg());
    mm.alloc_cgp(0, 0, 1, 2);
    const auto j = mm.dump_json();
    CHECK(j["total_pages"] == 16);
    CHECK(j["free_pages"] == 15);
    REQUIRE(j["groups"].size() == 1);
    CHECK(j["groups"][0]["mode"] == "cgp");
}
