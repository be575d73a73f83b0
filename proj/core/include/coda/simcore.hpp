#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coda/kernel.hpp"
#include "coda/memmgr.hpp"
#include "coda/network.hpp"
#include "coda/placement.hpp"
#include "coda/profile.hpp"
#include "coda/sched.hpp"
#include "coda/system.hpp"

#include <nlohmann/json.hpp>

namespace coda::sim {

enum class IssuerMode : std::uint8_t { Ndp, Host };

const char* to_string(IssuerMode m);

struct ClassStats {
    std::uint64_t count = 0;
    std::uint64_t bytes = 0;
};

struct WorkloadStats {
    std::string name;
    ClassStats local, remote, host;
    double cycles = 0;

    std::uint64_t accesses() const { return local.count + remote.count + host.count; }
    double remote_fraction() const {
        const auto t = accesses();
        return t ? static_cast<double>(remote.count) / static_cast<double>(t) : 0.0;
    }
};

struct SimReport {
    std::string issuer_mode = "ndp";
    ClassStats local, remote, host;
    std::vector<std::uint64_t> issued_per_stack;      // requests issued by each stack's SMs
    std::vector<std::uint64_t> served_per_stack;      // requests served by each stack
    std::vector<std::uint64_t> local_bytes_per_stack; // local network utilization
    std::vector<std::uint64_t> host_bytes_per_stack;  // per-stack host link utilization
    std::uint64_t remote_bytes = 0;                   // remote network utilization
    double cycles = 0;
    std::uint64_t fgp_fallback_pages = 0;
    nlohmann::ordered_json page_sharing;
    std::vector<WorkloadStats> per_workload;
    std::string baseline; // filled by the scenario runner
    double speedup_vs_baseline = 1.0;

    std::uint64_t total_accesses() const { return local.count + remote.count + host.count; }
    std::uint64_t total_bytes() const { return local.bytes + remote.bytes + host.bytes; }
    double remote_fraction() const {
        const auto t = total_accesses();
        return t ? static_cast<double>(remote.count) / static_cast<double>(t) : 0.0;
    }

    nlohmann::ordered_json to_json() const;
};

struct Workload {
    std::string name = "workload";
    std::vector<kmodel::KernelSpec> kernels;
    std::optional<std::uint32_t> pin_stack;
};

struct RunInput {
    Workload workload;
    placement::PlacementPlan plan;
    sched::SchedulerPolicy sched_policy = sched::SchedulerPolicy::BaselineAnyAvailable;
    NetworkModel net;
    SystemShape shape;
    addrmap::MappingConfig mapping;
    IssuerMode issuer = IssuerMode::Ndp;
};

// Executes the workload against the materialized plan: every trace access is
// translated, decoded and charged one access_granularity request on its
// network; block durations feed the scheduler, which yields the makespan.
SimReport run(const RunInput& in);

// Re-runs the scenario for each remote bandwidth (bytes/cycle), all else fixed.
std::vector<SimReport> sweep_remote_bw(const RunInput& in, const std::vector<double>& bw_list);

// Pinned multiprogrammed mode: each workload's blocks run only on its pinned
// stack; CGP mode places each workload's pages entirely on its own stack.
SimReport run_multiprogram(const std::vector<Workload>& workloads, placement::PlaceMode plan_mode,
                           const NetworkModel& net, const SystemShape& shape,
                           const addrmap::MappingConfig& mapping);

// Schedule of the last run is not retained; helper exposed for dumps.
std::vector<sched::ScheduleEvent> schedule_of(const RunInput& in);

} // namespace coda::sim
