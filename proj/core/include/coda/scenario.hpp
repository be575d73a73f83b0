#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coda/simcore.hpp"
#include "coda/synth.hpp"

#include <nlohmann/json.hpp>

namespace coda::scenario {

enum class Policy : std::uint8_t { FgpOnly, CgpOnly, CgpOnlyFta, Coda };

const char* to_string(Policy p);
Policy policy_from_string(const std::string& name);
std::string policy_slug(Policy p); // filename-safe

struct Diagnostic {
    enum class Severity : std::uint8_t { Warning, Error };
    Severity severity = Severity::Error;
    std::string field;
    std::string message;
};

struct NetworkConfig {
    double local_gbps = 256; // total internal bandwidth across stacks
    double host_gbps = 128;
    double remote_gbps = 16;
    double local_latency = 100;
    double host_latency = 300;
    double remote_latency = 500;
    double clock_ghz = 1.0;
    std::uint32_t host_mlp = 32;

    sim::NetworkModel to_model(std::uint32_t num_stacks) const;
};

struct Scenario {
    std::string name = "scenario";
    addrmap::MappingConfig mapping;
    SystemShape shape;
    NetworkConfig network;
    sim::IssuerMode issuer = sim::IssuerMode::Ndp;
    std::vector<sim::Workload> workloads;
    std::vector<Policy> policies = {Policy::FgpOnly, Policy::CgpOnly, Policy::CgpOnlyFta,
                                    Policy::Coda};
    std::vector<double> sweep_remote_gbps;
    std::uint64_t seed = 1;
    std::string out_dir; // default: out/<name>
};

// Parses and fully validates a scenario file; throws ConfigError naming the
// offending field. Kernel paths resolve relative to the scenario file.
Scenario load_scenario(const std::string& path);

// Collects all diagnosable problems without running. Never throws on
// validation issues; an unreadable/unparseable file yields one Error.
std::vector<Diagnostic> validate_scenario(const std::string& path);

// Builds the placement plan and scheduler selection for one policy.
struct PolicySetup {
    placement::PlacementPlan plan;
    sched::SchedulerPolicy sched_policy;
};

PolicySetup setup_policy(Policy policy, const std::vector<kmodel::KernelSpec>& kernels,
                         const kmodel::ObjectLayout& layout, const SystemShape& shape);

struct ScenarioResult {
    std::vector<std::pair<Policy, sim::SimReport>> reports;
    nlohmann::ordered_json summary;
    std::string summary_csv;
};

ScenarioResult run_scenario(const Scenario& sc);

// Per-policy reruns with remote bandwidth overridden (values in GB/s).
struct SweepResult {
    std::vector<double> values_gbps;
    // [value index][policy] -> report
    std::vector<std::vector<std::pair<Policy, sim::SimReport>>> reports;
    nlohmann::ordered_json summary;
    std::string summary_csv;
};

SweepResult run_sweep(const Scenario& sc, const std::vector<double>& remote_gbps);

struct DumpOptions {
    bool plans = false;
    bool schedules = false;
    bool traces = false;
    bool allocator = false;
};

enum class OutputFormat : std::uint8_t { Json, Csv, Both };

// Writes report files under out_dir; returns the list of files written.
std::vector<std::string> write_outputs(const Scenario& sc, const ScenarioResult& res,
                                       const std::string& out_dir, OutputFormat format,
                                       const DumpOptions& dumps);

std::vector<std::string> write_sweep_outputs(const SweepResult& res, const std::string& out_dir,
                                             OutputFormat format);

} // namespace coda::scenario
