// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coda/addrmap.hpp"
#include "coda/placement.hpp"
#include "coda/scenario.hpp"
#include "coda/sched.hpp"
#include "coda/simcore.hpp"
#include "coda/stride.hpp"
#include "coda/trace.hpp"

using namespace coda;
namespace fs = std::filesystem;

namespace {

const std::string kScenarioDir = CODA_SCENARIO_DIR;
int g_failures = 0;

void report(int idx, bool ok, const std::string& what, const std::string& detail = "") {
    std::printf("[%2d] %s %s%s%s\n", idx, ok ? "PASS" : "FAIL", what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
}

std::vector<addrmap::MappingConfig> random_configs(std::size_t count, std::uint64_t total) {
    std::mt19937_64 rng(2024);
    std::vector<addrmap::MappingConfig> out;
    std::set<std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>> seen;
    while (out.size() < count) {
        addrmap::MappingConfig c;
        c.num_stacks = 1u << (1 + rng() % 4);                    // 2..16
        c.page_size = 1024ull << (rng() % 5);                    // 1K..16K
        std::vector<std::uint64_t> fgs;
        for (std::uint64_t fg = 128; fg * c.num_stacks <= c.page_size; fg <<= 1)
            fgs.push_back(fg);
        if (fgs.empty()) continue;
        c.fg_interleave = fgs[rng() % fgs.size()];
        c.access_granularity = 128;
        c.total_bytes = total;
        if (total % c.group_bytes() != 0) continue;
        if (!seen.insert({c.num_stacks, c.page_size, c.fg_interleave}).second) continue;
        c.validate();
        out.push_back(c);
    }
    return out;
}

void criterion_1_and_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto configs = random_configs(8, 1 << 20);
    std::uint64_t violations = 0;
    for (const auto& c : configs) {
        for (auto g : {addrmap::Granularity::FGP, addrmap::Granularity::CGP}) {
            std::vector<std::vector<bool>> hit(c.num_stacks,
                                               std::vector<bool>(c.stack_bytes() / 128, false));
            for (std::uint64_t pa = 0; pa < c.total_bytes; pa += 128) {
                const auto loc = addrmap::decode(pa, g, c);
                if (addrmap::encode(loc, g, c) != pa) ++violations;
                if (loc.local_offset % 128 != 0) ++violations;
                auto ref = hit[loc.stack_id][loc.local_offset / 128];
                if (ref) ++violations; // duplicate mapping
                hit[loc.stack_id][loc.local_offset / 128] = true;
            }
            for (const auto& stack : hit)
                for (bool h : stack)
                    if (!h) ++violations; // uncovered slot
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, violations == 0 && secs < 5.0, "address-mapping bijectivity (8 configs, 1 MB)",
           "violations=" + std::to_string(violations) + ", " + std::to_string(secs) + "s");

    std::uint64_t group_violations = 0;
    for (const auto& c : configs)
        for (std::uint64_t g = 0; g < c.total_bytes / c.group_bytes(); ++g)
            if (!addrmap::coverage_equivalence(g * c.group_bytes(), c)) ++group_violations;
    report(2, group_violations == 0, "page-group FGP/CGP coverage equivalence",
           "violations=" + std::to_string(group_violations));
}

void criterion_3() {
    const SystemShape shape{4, 4, 6}; // N_blocks_per_stack = 24
    bool ok = sched::affinity(0, shape) == 0 && sched::affinity(25, shape) == 1 &&
              sched::affinity(96, shape) == 0;
    std::map<std::uint32_t, int> per_stack;
    for (std::uint64_t b = 0; b < 96; ++b) ++per_stack[sched::affinity(b, shape)];
    for (std::uint32_t s = 0; s < 4; ++s) ok = ok && per_stack[s] == 24;

    ok = ok && placement::chunk_size(1024, shape, 4096) == 4096;
    ok = ok && placement::chunk_size(100, shape, 4096) == 2400;
    ok = ok && placement::chunk_size(0, shape, 4096) == 0;

    ok = ok && placement::stack_of(0, 0, 4096, 4) == 0 &&
         placement::stack_of(4096, 0, 4096, 4) == 1 &&
         placement::stack_of(16384, 0, 4096, 4) == 0;
    for (std::uint64_t va = 0; va < 1 << 16; va += 256)
        ok = ok && placement::stack_of(va + 4 * 4096, 0, 4096, 4) ==
                       placement::stack_of(va, 0, 4096, 4);
    report(3, ok, "affinity / chunk-size / stack-assignment worked values");
}

void criterion_4() {
    std::mt19937_64 rng(77);
    std::uint64_t mismatches = 0, specs = 0;
    while (specs < 120) {
        kmodel::KernelSpec k;
        const bool two_d = rng() % 3 == 0;
        k.grid = {static_cast<std::uint32_t>(2 + rng() % 7),
                  two_d ? static_cast<std::uint32_t>(2 + rng() % 3) : 1};
        k.block = {static_cast<std::uint32_t>(1 + rng() % 8),
                   static_cast<std::uint32_t>(1 + rng() % 3)};
        const std::int64_t cb = rng() % 50;
        const std::int64_t ctx = rng() % 9;
        const std::int64_t cty = rng() % 5;
        const std::int64_t ci = rng() % 4;
        const std::int64_t trips = 1 + rng() % 6;
        const std::int64_t c0 = rng() % 32;
        k.params["trips"] = trips;

        std::string idx = "blockIdx.x*" + std::to_string(cb);
        if (two_d) idx += " + blockIdx.y*" + std::to_string(cb * k.grid.x); // row-major consistent
        idx += " + threadIdx.x*" + std::to_string(ctx) + " + threadIdx.y*" +
               std::to_string(cty) + " + i*" + std::to_string(ci) + " + " + std::to_string(c0);

        kmodel::AccessExpr a;
        a.object = "buf";
        a.index = kmodel::Expr::parse(idx);
        a.loop = kmodel::LoopSpec{"i", kmodel::Expr::parse("trips")};
        const std::uint64_t max_idx = cb * (k.grid.count() - 1) + ctx * (k.block.x - 1) +
                                      cty * (k.block.y - 1) + ci * (trips - 1) + c0;
        k.objects.push_back({"buf", 4, max_idx + 1, true});
        k.accesses.push_back(std::move(a));
        k.validate();

        const auto r = kmodel::analyze_stride(k, k.accesses[0]);
        if (!r.regular) {
            ++mismatches;
            break;
        }
        ++specs;

        std::int64_t prev_min = 0;
        for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
            std::uint64_t mn = ~0ull, mx = 0;
            for (const auto& e : kmodel::gen_trace(k, b)) {
                mn = std::min(mn, e.byte_offset);
                mx = std::max(mx, e.byte_offset);
            }
            if (mx - mn + 4 != r.per_block_bytes) ++mismatches;
            if (b == 0 && static_cast<std::int64_t>(mn) != r.base_offset) ++mismatches;
            if (b > 0 && static_cast<std::int64_t>(mn) - prev_min != r.block_stride) ++mismatches;
            prev_min = static_cast<std::int64_t>(mn);
        }
    }
    report(4, mismatches == 0,
           "analyzer-executor cross-validation (" + std::to_string(specs) + " affine specs)",
           "mismatches=" + std::to_string(mismatches));
}

const sim::SimReport* find_report(const scenario::ScenarioResult& res, scenario::Policy p) {
    for (const auto& [pol, rep] : res.reports)
        if (pol == p) return &rep;
    return nullptr;
}

void criterion_5_6_7() {
    const auto sc = scenario::load_scenario(kScenarioDir + "/block_exclusive.json");
    const auto res = scenario::run_scenario(sc);
    const auto* fgp = find_report(res, scenario::Policy::FgpOnly);
    const auto* coda = find_report(res, scenario::Policy::Coda);
    bool ok5 = fgp && coda;
    std::string detail;
    if (ok5) {
        const double frac = fgp->remote_fraction();
        const double speedup = coda->speedup_vs_baseline;
        ok5 = coda->remote.count == 0 && std::abs(frac - 0.75) <= 0.01 && speedup > 1.2;
        detail = "coda_remote=" + std::to_string(coda->remote.count) +
                 ", fgp_frac=" + std::to_string(frac) + ", speedup=" + std::to_string(speedup);
    }
    report(5, ok5, "block-exclusive traffic accounting", detail);

    const auto sh = scenario::load_scenario(kScenarioDir + "/sharing.json");
    const auto shres = scenario::run_scenario(sh);
    const auto* sfgp = find_report(shres, scenario::Policy::FgpOnly);
    const auto* scoda = find_report(shres, scenario::Policy::Coda);
    const bool ok6 = sfgp && scoda && sfgp->to_json().dump() == scoda->to_json().dump();
    report(6, ok6, "fully-shared scenario: CODA report byte-identical to FGP-Only");

    const auto sweep = scenario::run_sweep(sc, {16, 32, 64, 128, 256});
    bool ok7 = true;
    double prev = 1e300;
    std::string pts;
    for (std::size_t vi = 0; vi < sweep.values_gbps.size(); ++vi) {
        double speedup = 0;
        for (const auto& [pol, rep] : sweep.reports[vi])
            if (pol == scenario::Policy::Coda) speedup = rep.speedup_vs_baseline;
        ok7 = ok7 && speedup > 1.0 && speedup <= prev + 1e-9;
        prev = speedup;
        pts += (pts.empty() ? "" : " ") + std::to_string(speedup);
    }
    report(7, ok7, "remote-bandwidth sensitivity trend", pts);
}

void criterion_8() {
    const auto sc = scenario::load_scenario(kScenarioDir + "/streaming_host.json");
    const auto res = scenario::run_scenario(sc);
    const auto* fgp = find_report(res, scenario::Policy::FgpOnly);
    const auto* cgp = find_report(res, scenario::Policy::CgpOnly);
    const bool ok = fgp && cgp && fgp->cycles < cgp->cycles;
    report(8, ok, "host-mode interleaving direction",
           fgp && cgp ? "fgp=" + std::to_string(fgp->cycles) + " cgp=" +
                            std::to_string(cgp->cycles)
                      : "missing reports");
}

void criterion_9() {
    const SystemShape shape{4, 4, 6};
    auto uniform = [](std::uint32_t, std::uint32_t) { return 1.0; };
    const std::uint32_t oversub = 100 * 4 * 24;
    const double base_big = sched::makespan(sched::dispatch(
        sched::SchedulerPolicy::BaselineAnyAvailable, oversub, uniform, shape));
    const double aff_big = sched::makespan(
        sched::dispatch(sched::SchedulerPolicy::Affinity, oversub, uniform, shape));
    const double base_sad = sched::makespan(
        sched::dispatch(sched::SchedulerPolicy::BaselineAnyAvailable, 61, uniform, shape));
    const double aff_sad = sched::makespan(
        sched::dispatch(sched::SchedulerPolicy::Affinity, 61, uniform, shape));
    const double big_ratio = aff_big / base_big;
    const double sad_ratio = aff_sad / base_sad;
    report(9, big_ratio <= 1.05 && sad_ratio > 1.05, "affinity scheduling overhead trend",
           "oversubscribed=" + std::to_string(big_ratio) + ", 61-on-16=" +
               std::to_string(sad_ratio));
}

void criterion_10() {
    const auto sc = scenario::load_scenario(kScenarioDir + "/multiprogram.json");
    const auto res = scenario::run_scenario(sc);
    const auto* fgp = find_report(res, scenario::Policy::FgpOnly);
    const auto* cgp = find_report(res, scenario::Policy::CgpOnly);
    bool ok = fgp && cgp && cgp->per_workload.size() == 4 && fgp->per_workload.size() == 4;
    if (ok) {
        for (const auto& w : cgp->per_workload) ok = ok && w.remote_fraction() < 0.01;
        for (const auto& w : fgp->per_workload)
            ok = ok && std::abs(w.remote_fraction() - 0.75) <= 0.01;
    }
    report(10, ok, "multiprogrammed isolation (4 pinned workloads)");
}

void criterion_11() {
    std::vector<double> speedups, cvs;
    for (const char* name : {"csr_regular.json", "csr_medium.json", "csr_irregular.json"}) {
        const auto sc = scenario::load_scenario(kScenarioDir + "/" + name);
        const auto res = scenario::run_scenario(sc);
        const auto* coda = find_report(res, scenario::Policy::Coda);
        speedups.push_back(coda ? coda->speedup_vs_baseline : 0);
        cvs.push_back(res.summary["regularity"]["graph"]["cv"].get<double>());
    }
    bool ok = speedups.size() == 3;
    ok = ok && cvs[0] < cvs[1] && cvs[1] < cvs[2]; // the graphs really differ in cv
    ok = ok && speedups[0] + 1e-9 >= speedups[1] && speedups[1] + 1e-9 >= speedups[2];
    for (double s : speedups) ok = ok && s >= 1.0 - 1e-9;
    std::string detail = "cv=(" + std::to_string(cvs[0]) + "," + std::to_string(cvs[1]) + "," +
                         std::to_string(cvs[2]) + ") speedup=(" + std::to_string(speedups[0]) +
                         "," + std::to_string(speedups[1]) + "," + std::to_string(speedups[2]) +
                         ")";
    report(11, ok, "graph regularity study direction", detail);
}

void criterion_12() {
    const auto sc = scenario::load_scenario(kScenarioDir + "/block_exclusive.json");
    const auto d1 = fs::temp_directory_path() / "coda_accept_a";
    const auto d2 = fs::temp_directory_path() / "coda_accept_b";
    fs::remove_all(d1);
    fs::remove_all(d2);
    scenario::DumpOptions dumps;
    dumps.plans = dumps.schedules = dumps.allocator = true;
    const auto f1 = scenario::write_outputs(sc, scenario::run_scenario(sc), d1.string(),
                                            scenario::OutputFormat::Both, dumps);
    const auto f2 = scenario::write_outputs(sc, scenario::run_scenario(sc), d2.string(),
                                            scenario::OutputFormat::Both, dumps);
    bool ok = f1.size() == f2.size() && !f1.empty();
    for (std::size_t i = 0; ok && i < f1.size(); ++i) {
        std::ifstream a(f1[i], std::ios::binary), b(f2[i], std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        ok = !sa.empty() && sa == sb;
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
    report(12, ok, "same-seed reruns produce byte-identical report files",
           std::to_string(f1.size()) + " files compared");
}

} // namespace

int main() {
    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5_6_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
