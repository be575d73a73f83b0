#include "coda/simcore.hpp"

#include <algorithm>
#include <set>

#include "coda/errors.hpp"
#include "coda/trace.hpp"

namespace coda::sim {

const char* to_string(IssuerMode m) { return m == IssuerMode::Ndp ? "ndp" : "host"; }

namespace {

kmodel::ObjectLayout layout_from_plan(const placement::PlacementPlan& plan) {
    kmodel::ObjectLayout layout;
    layout.page_size = plan.page_size;
    for (const auto& o : plan.objects)
        layout.entries.push_back({o.object, o.start_va, o.bytes, o.pages});
    return layout;
}

// Requests served per stack for one block, for one kernel. The served stack
// is a pure function of the materialized page tables, independent of where
// the block runs.
struct BlockServe {
    std::vector<std::uint64_t> per_stack;
    std::uint64_t total = 0;
};

BlockServe serve_counts(const kmodel::KernelSpec& k, std::uint32_t block,
                        const std::vector<std::uint64_t>& start_vas,
                        const mem::MemoryManager& mm, std::uint32_t owner,
                        const addrmap::MappingConfig& cfg) {
    BlockServe s;
    s.per_stack.assign(cfg.num_stacks, 0);
    for (const auto& e : kmodel::gen_trace(k, block)) {
        const auto [pa, gran] = mm.translate(start_vas[e.object] + e.byte_offset, owner);
        ++s.per_stack[addrmap::decode(pa, gran, cfg).stack_id];
        ++s.total;
    }
    return s;
}

struct CostModel {
    double cost_local;
    double cost_remote;

    CostModel(const NetworkModel& net, const SystemShape& shape, std::uint64_t ag) {
        const double local_share = net.local_bw / shape.sms_per_stack;
        const double remote_share = net.remote_bw / shape.total_sms();
        cost_local = net.local_lat + static_cast<double>(ag) / local_share;
        cost_remote = net.remote_lat + static_cast<double>(ag) / remote_share;
    }

    double block_duration(const BlockServe& s, std::uint32_t stack) const {
        const std::uint64_t n_local = s.per_stack[stack];
        const std::uint64_t n_remote = s.total - n_local;
        return static_cast<double>(n_local) * cost_local +
               static_cast<double>(n_remote) * cost_remote;
    }
};

nlohmann::ordered_json sharing_json(const std::vector<kmodel::PageAccessHistogram>& parts) {
    auto merged = kmodel::merge_profiles(parts);
    return merged.to_json();
}

void check_shapes(const addrmap::MappingConfig& mapping, const SystemShape& shape) {
    mapping.validate();
    shape.validate();
    if (mapping.num_stacks != shape.num_stacks)
        throw ConfigError("mapping.num_stacks (" + std::to_string(mapping.num_stacks) +
                          ") != shape.num_stacks (" + std::to_string(shape.num_stacks) + ")");
}

SimReport run_impl(const RunInput& in, std::vector<sched::ScheduleEvent>* events_out) {
    check_shapes(in.mapping, in.shape);
    in.net.validate();
    if (in.workload.kernels.empty()) throw ConfigError("workload has no kernels");
    if (in.workload.pin_stack && *in.workload.pin_stack >= in.shape.num_stacks)
        throw ConfigError("pin_stack out of range");

    const std::uint32_t N = in.shape.num_stacks;
    const std::uint64_t ag = in.mapping.access_granularity;
    const auto layout = layout_from_plan(in.plan);
    if (layout.total_pages() > in.mapping.total_pages())
        throw CapacityError("workload footprint exceeds physical memory");

    mem::MemoryManager mm(in.mapping);
    const auto mat = placement::materialize(in.plan, mm, /*owner=*/0);

    SimReport rep;
    rep.issuer_mode = to_string(in.issuer);
    rep.issued_per_stack.assign(N, 0);
    rep.served_per_stack.assign(N, 0);
    rep.local_bytes_per_stack.assign(N, 0);
    rep.host_bytes_per_stack.assign(N, 0);
    rep.fgp_fallback_pages = mat.fgp_fallback_pages;

    std::vector<kmodel::PageAccessHistogram> profiles;
    for (const auto& k : in.workload.kernels)
        profiles.push_back(kmodel::profile(k, layout, in.shape));
    rep.page_sharing = sharing_json(profiles);

    if (in.issuer == IssuerMode::Host) {
        // Single in-order host stream; host_mlp outstanding requests per step,
        // distinct per-stack host links proceed in parallel within a step.
        const double link_bw = in.net.host_bw / N;
        double t = 0;
        std::vector<std::uint64_t> window(N, 0);
        std::uint32_t in_window = 0;
        auto flush = [&]() {
            if (in_window == 0) return;
            std::uint64_t max_bytes = 0;
            for (std::uint32_t s = 0; s < N; ++s) {
                max_bytes = std::max(max_bytes, window[s]);
                window[s] = 0;
            }
            t += in.net.host_lat + static_cast<double>(max_bytes) / link_bw;
            in_window = 0;
        };
        for (const auto& k : in.workload.kernels) {
            const auto start_vas = layout.start_vas(k);
            for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
                for (const auto& e : kmodel::gen_trace(k, b)) {
                    const auto [pa, gran] = mm.translate(start_vas[e.object] + e.byte_offset, 0);
                    const auto stack = addrmap::decode(pa, gran, in.mapping).stack_id;
                    ++rep.host.count;
                    rep.host.bytes += ag;
                    ++rep.served_per_stack[stack];
                    rep.host_bytes_per_stack[stack] += ag;
                    window[stack] += ag;
                    if (++in_window == in.net.host_mlp) flush();
                }
            }
        }
        flush();
        rep.cycles = t;
        return rep;
    }

    const CostModel cost(in.net, in.shape, ag);
    double total_cycles = 0;
    for (const auto& k : in.workload.kernels) {
        const auto start_vas = layout.start_vas(k);
        std::vector<BlockServe> serves(k.total_blocks());
        for (std::uint32_t b = 0; b < k.total_blocks(); ++b)
            serves[b] = serve_counts(k, b, start_vas, mm, 0, in.mapping);

        auto duration = [&](std::uint32_t block, std::uint32_t stack) {
            return cost.block_duration(serves[block], stack);
        };
        auto events = sched::dispatch(in.sched_policy,
                                      static_cast<std::uint32_t>(k.total_blocks()), duration,
                                      in.shape, in.workload.pin_stack);
        total_cycles += sched::makespan(events);

        for (const auto& ev : events) {
            const auto& s = serves[ev.block];
            const std::uint64_t n_local = s.per_stack[ev.stack];
            const std::uint64_t n_remote = s.total - n_local;
            rep.local.count += n_local;
            rep.local.bytes += n_local * ag;
            rep.remote.count += n_remote;
            rep.remote.bytes += n_remote * ag;
            rep.issued_per_stack[ev.stack] += s.total;
            for (std::uint32_t st = 0; st < N; ++st) rep.served_per_stack[st] += s.per_stack[st];
            rep.local_bytes_per_stack[ev.stack] += n_local * ag;
            rep.remote_bytes += n_remote * ag;
        }
        if (events_out)
            events_out->insert(events_out->end(), events.begin(), events.end());
    }
    rep.cycles = total_cycles;
    return rep;
}

} // namespace

SimReport run(const RunInput& in) { return run_impl(in, nullptr); }

std::vector<sched::ScheduleEvent> schedule_of(const RunInput& in) {
    std::vector<sched::ScheduleEvent> events;
    run_impl(in, &events);
    return events;
}

std::vector<SimReport> sweep_remote_bw(const RunInput& in, const std::vector<double>& bw_list) {
    std::vector<SimReport> out;
    out.reserve(bw_list.size());
    for (double bw : bw_list) {
        RunInput v = in;
        v.net.remote_bw = bw;
        out.push_back(run(v));
    }
    return out;
}

SimReport run_multiprogram(const std::vector<Workload>& workloads, placement::PlaceMode plan_mode,
                           const NetworkModel& net, const SystemShape& shape,
                           const addrmap::MappingConfig& mapping) {
    check_shapes(mapping, shape);
    net.validate();
    if (workloads.empty()) throw ConfigError("run_multiprogram requires at least one workload");
    std::set<std::uint32_t> pins;
    for (const auto& w : workloads) {
        if (!w.pin_stack)
            throw ConfigError("multiprogrammed workload '" + w.name + "' has no pin_stack");
        if (*w.pin_stack >= shape.num_stacks)
            throw ConfigError("workload '" + w.name + "' pinned to invalid stack " +
                              std::to_string(*w.pin_stack));
        if (!pins.insert(*w.pin_stack).second)
            throw ConfigError("stack " + std::to_string(*w.pin_stack) +
                              " pinned by more than one workload");
    }

    const std::uint32_t N = shape.num_stacks;
    const std::uint64_t ag = mapping.access_granularity;
    mem::MemoryManager mm(mapping);
    const CostModel cost(net, shape, ag);

    SimReport rep;
    rep.issued_per_stack.assign(N, 0);
    rep.served_per_stack.assign(N, 0);
    rep.local_bytes_per_stack.assign(N, 0);
    rep.host_bytes_per_stack.assign(N, 0);

    std::vector<kmodel::PageAccessHistogram> profiles;
    double max_cycles = 0;
    for (std::uint32_t wi = 0; wi < workloads.size(); ++wi) {
        const auto& w = workloads[wi];
        if (w.kernels.empty()) throw ConfigError("workload '" + w.name + "' has no kernels");
        const auto layout = kmodel::build_layout(w.kernels, mapping.page_size);
        const auto plan = plan_mode == placement::PlaceMode::FGP
                              ? placement::uniform_fgp_plan(layout, shape)
                              : placement::pinned_cgp_plan(layout, shape, *w.pin_stack);
        const auto mat = placement::materialize(plan, mm, wi);
        rep.fgp_fallback_pages += mat.fgp_fallback_pages;

        WorkloadStats ws;
        ws.name = w.name;
        double wl_cycles = 0;
        for (const auto& k : w.kernels) {
            auto prof = kmodel::profile(k, layout, shape);
            // Distinct address spaces: namespace the vpns so merged sharing
            // stats never alias pages of different workloads.
            for (auto& p : prof.pages) p.vpn |= std::uint64_t{wi} << 40;
            profiles.push_back(std::move(prof));
            const auto start_vas = layout.start_vas(k);
            std::vector<BlockServe> serves(k.total_blocks());
            for (std::uint32_t b = 0; b < k.total_blocks(); ++b)
                serves[b] = serve_counts(k, b, start_vas, mm, wi, mapping);
            auto duration = [&](std::uint32_t block, std::uint32_t stack) {
                return cost.block_duration(serves[block], stack);
            };
            auto events = sched::dispatch(sched::SchedulerPolicy::BaselineAnyAvailable,
                                          static_cast<std::uint32_t>(k.total_blocks()), duration,
                                          shape, *w.pin_stack);
            wl_cycles += sched::makespan(events);
            for (const auto& ev : events) {
                const auto& s = serves[ev.block];
                const std::uint64_t n_local = s.per_stack[ev.stack];
                const std::uint64_t n_remote = s.total - n_local;
                ws.local.count += n_local;
                ws.local.bytes += n_local * ag;
                ws.remote.count += n_remote;
                ws.remote.bytes += n_remote * ag;
                rep.issued_per_stack[ev.stack] += s.total;
                for (std::uint32_t st = 0; st < N; ++st)
                    rep.served_per_stack[st] += s.per_stack[st];
                rep.local_bytes_per_stack[ev.stack] += n_local * ag;
                rep.remote_bytes += n_remote * ag;
            }
        }
        ws.cycles = wl_cycles;
        max_cycles = std::max(max_cycles, wl_cycles);
        rep.local.count += ws.local.count;
        rep.local.bytes += ws.local.bytes;
        rep.remote.count += ws.remote.count;
        rep.remote.bytes += ws.remote.bytes;
        rep.per_workload.push_back(std::move(ws));
    }
    rep.cycles = max_cycles;
    rep.page_sharing = sharing_json(profiles);
    return rep;
}

nlohmann::ordered_json SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["issuer_mode"] = issuer_mode;
    j["counts"] = {{"local", local.count}, {"remote", remote.count}, {"host", host.count}};
    j["bytes"] = {{"local", local.bytes}, {"remote", remote.bytes}, {"host", host.bytes}};
    j["total_accesses"] = total_accesses();
    j["total_bytes"] = total_bytes();
    j["remote_fraction"] = remote_fraction();
    j["issued_per_stack"] = issued_per_stack;
    j["served_per_stack"] = served_per_stack;
    j["network_bytes"] = {{"local_per_stack", local_bytes_per_stack},
                          {"host_per_stack", host_bytes_per_stack},
                          {"remote", remote_bytes}};
    j["cycles"] = cycles;
    j["fgp_fallback_pages"] = fgp_fallback_pages;
    j["page_sharing"] = page_sharing;
    if (!per_workload.empty()) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& w : per_workload)
            arr.push_back({{"name", w.name},
                           {"local", w.local.count},
                           {"remote", w.remote.count},
                           {"host", w.host.count},
                           {"remote_fraction", w.remote_fraction()},
                           {"cycles", w.cycles}});
        j["per_workload"] = std::move(arr);
    }
    j["baseline"] = baseline;
    j["speedup_vs_baseline"] = speedup_vs_baseline;
    return j;
}

} // namespace coda::sim
