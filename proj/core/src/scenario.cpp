#include "coda/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "coda/errors.hpp"
#include "coda/trace.hpp"

namespace fs = std::filesystem;

namespace coda::scenario {

const char* to_string(Policy p) {
    switch (p) {
        case Policy::FgpOnly: return "FGP-Only";
        case Policy::CgpOnly: return "CGP-Only";
        case Policy::CgpOnlyFta: return "CGP-Only+FTA";
        case Policy::Coda: return "CODA";
    }
    return "?";
}

Policy policy_from_string(const std::string& name) {
    if (name == "FGP-Only") return Policy::FgpOnly;
    if (name == "CGP-Only") return Policy::CgpOnly;
    if (name == "CGP-Only+FTA") return Policy::CgpOnlyFta;
    if (name == "CODA") return Policy::Coda;
    throw ConfigError("unknown policy '" + name +
                      "' (expected FGP-Only, CGP-Only, CGP-Only+FTA or CODA)");
}

std::string policy_slug(Policy p) {
    switch (p) {
        case Policy::FgpOnly: return "fgp-only";
        case Policy::CgpOnly: return "cgp-only";
        case Policy::CgpOnlyFta: return "cgp-only-fta";
        case Policy::Coda: return "coda";
    }
    return "unknown";
}

sim::NetworkModel NetworkConfig::to_model(std::uint32_t num_stacks) const {
    if (clock_ghz <= 0) throw ConfigError("network.clock_ghz must be positive");
    auto n = sim::NetworkModel::from_gbps(local_gbps, host_gbps, remote_gbps, clock_ghz,
                                          num_stacks);
    n.local_lat = local_latency;
    n.host_lat = host_latency;
    n.remote_lat = remote_latency;
    n.host_mlp = host_mlp;
    return n;
}

namespace {

nlohmann::json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string(what) + " file not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(what) + " " + path + ": " + e.what());
    }
    return j;
}

kmodel::KernelSpec synth_from_json(const nlohmann::json& js) {
    const std::string type = js.at("type").get<std::string>();
    if (type == "csr") {
        synth::CsrParams p;
        p.group_count = js.value("group_count", p.group_count);
        p.group_size = js.value("group_size", p.group_size);
        p.threads = js.value("threads", p.threads);
        p.mean_elems = js.value("mean_elems", p.mean_elems);
        p.cv = js.value("cv", p.cv);
        return synth::csr_graph(p);
    }
    if (type == "block_exclusive")
        return synth::block_exclusive(js.value("blocks", 64u), js.value("threads", 256u),
                                      js.value("elems_per_thread", 4u));
    if (type == "broadcast")
        return synth::broadcast(js.value("blocks", 96u), js.value("threads", 256u),
                                js.value("total_elems", std::uint64_t{4096}));
    if (type == "streaming")
        return synth::streaming(js.value("blocks", 64u), js.value("threads", 256u),
                                js.value("elems_per_line", 32u));
    throw ConfigError("unknown synth workload type '" + type + "'");
}

Scenario parse_scenario(const nlohmann::json& j, const fs::path& base_dir) {
    Scenario sc;
    sc.name = j.value("name", "scenario");
    sc.seed = j.value("seed", std::uint64_t{1});

    if (j.contains("system")) {
        const auto& sys = j["system"];
        if (sys.contains("mapping")) {
            const auto& m = sys["mapping"];
            sc.mapping.num_stacks = m.value("num_stacks", sc.mapping.num_stacks);
            sc.mapping.page_size = m.value("page_size", sc.mapping.page_size);
            sc.mapping.fg_interleave = m.value("fg_interleave", sc.mapping.fg_interleave);
            sc.mapping.access_granularity =
                m.value("access_granularity", sc.mapping.access_granularity);
            sc.mapping.total_bytes = m.value("mem_bytes", sc.mapping.total_bytes);
        }
        if (sys.contains("shape")) {
            const auto& s = sys["shape"];
            sc.shape.sms_per_stack = s.value("sms_per_stack", sc.shape.sms_per_stack);
            sc.shape.blocks_per_sm = s.value("blocks_per_sm", sc.shape.blocks_per_sm);
        }
        if (sys.contains("network")) {
            const auto& n = sys["network"];
            sc.network.local_gbps = n.value("local_gbps", sc.network.local_gbps);
            sc.network.host_gbps = n.value("host_gbps", sc.network.host_gbps);
            sc.network.remote_gbps = n.value("remote_gbps", sc.network.remote_gbps);
            sc.network.local_latency = n.value("local_latency", sc.network.local_latency);
            sc.network.host_latency = n.value("host_latency", sc.network.host_latency);
            sc.network.remote_latency = n.value("remote_latency", sc.network.remote_latency);
            sc.network.clock_ghz = n.value("clock_ghz", sc.network.clock_ghz);
            sc.network.host_mlp = n.value("host_mlp", sc.network.host_mlp);
        }
    }
    sc.shape.num_stacks = sc.mapping.num_stacks;

    const std::string mode = j.value("issuer_mode", "ndp");
    if (mode == "ndp")
        sc.issuer = sim::IssuerMode::Ndp;
    else if (mode == "host")
        sc.issuer = sim::IssuerMode::Host;
    else
        throw ConfigError("issuer_mode must be 'ndp' or 'host', got '" + mode + "'");

    if (!j.contains("workloads") || !j["workloads"].is_array() || j["workloads"].empty())
        throw ConfigError("scenario requires a nonempty 'workloads' array");
    for (const auto& jw : j["workloads"]) {
        sim::Workload w;
        w.name = jw.value("name", "workload" + std::to_string(sc.workloads.size()));
        if (jw.contains("pin_stack")) w.pin_stack = jw["pin_stack"].get<std::uint32_t>();
        if (jw.contains("synth")) {
            w.kernels.push_back(synth_from_json(jw["synth"]));
        }
        std::vector<std::string> paths;
        if (jw.contains("kernel")) paths.push_back(jw["kernel"].get<std::string>());
        if (jw.contains("kernels"))
            for (const auto& p : jw["kernels"]) paths.push_back(p.get<std::string>());
        for (const auto& p : paths) {
            const fs::path kp = fs::path(p).is_absolute() ? fs::path(p) : base_dir / p;
            w.kernels.push_back(kmodel::KernelSpec::load_file(kp.string()));
        }
        if (w.kernels.empty())
            throw ConfigError("workload '" + w.name + "' has neither kernels nor synth");
        sc.workloads.push_back(std::move(w));
    }

    if (j.contains("policies")) {
        sc.policies.clear();
        for (const auto& p : j["policies"]) sc.policies.push_back(policy_from_string(p));
        if (sc.policies.empty()) throw ConfigError("policies must not be empty");
    }

    if (j.contains("sweeps") && j["sweeps"].contains("remote_gbps"))
        for (const auto& v : j["sweeps"]["remote_gbps"]) sc.sweep_remote_gbps.push_back(v);

    sc.out_dir = j.value("out_dir", "out/" + sc.name);
    return sc;
}

bool is_multiprogram(const Scenario& sc) { return sc.workloads.size() > 1; }

void check_semantics(const Scenario& sc) {
    sc.mapping.validate();
    sc.shape.validate();
    sc.network.to_model(sc.mapping.num_stacks).validate();
    for (const auto& w : sc.workloads) {
        if (w.pin_stack && *w.pin_stack >= sc.mapping.num_stacks)
            throw ConfigError("workload '" + w.name + "' pin_stack " +
                              std::to_string(*w.pin_stack) + " out of range");
    }
    if (is_multiprogram(sc)) {
        std::set<std::uint32_t> pins;
        for (const auto& w : sc.workloads) {
            if (!w.pin_stack)
                throw ConfigError("multiprogrammed scenario: workload '" + w.name +
                                  "' needs pin_stack");
            if (!pins.insert(*w.pin_stack).second)
                throw ConfigError("pin_stack " + std::to_string(*w.pin_stack) +
                                  " used by more than one workload");
        }
        for (auto p : sc.policies)
            if (p != Policy::FgpOnly && p != Policy::CgpOnly)
                throw ConfigError(
                    "multiprogrammed scenarios support only FGP-Only and CGP-Only policies");
        if (sc.issuer == sim::IssuerMode::Host)
            throw ConfigError("multiprogrammed scenarios run in ndp issuer mode only");
    }
    std::set<Policy> seen;
    for (auto p : sc.policies)
        if (!seen.insert(p).second)
            throw ConfigError(std::string("policy '") + to_string(p) + "' listed twice");
}

} // namespace

Scenario load_scenario(const std::string& path) {
    const auto j = read_json_file(path, "scenario");
    Scenario sc = parse_scenario(j, fs::path(path).parent_path());
    check_semantics(sc);
    return sc;
}

std::vector<Diagnostic> validate_scenario(const std::string& path) {
    std::vector<Diagnostic> diags;
    nlohmann::json j;
    try {
        j = read_json_file(path, "scenario");
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "file", e.what()});
        return diags;
    }

    Scenario sc;
    try {
        sc = parse_scenario(j, fs::path(path).parent_path());
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "scenario", e.what()});
        return diags;
    }

    // Field-by-field checks so one failure does not mask the others.
    try {
        sc.mapping.validate();
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "system.mapping", e.what()});
    }
    try {
        sc.shape.validate();
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "system.shape", e.what()});
    }
    try {
        const auto net = sc.network.to_model(std::max(1u, sc.mapping.num_stacks));
        net.validate();
        if (!net.ordering_ok(std::max(1u, sc.mapping.num_stacks)))
            diags.push_back({Diagnostic::Severity::Warning, "system.network",
                             "bandwidth ordering Local > Host > Remote (per-stack shares) does "
                             "not hold"});
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "system.network", e.what()});
    }
    try {
        check_semantics(sc);
    } catch (const ConfigError& e) {
        diags.push_back({Diagnostic::Severity::Error, "scenario", e.what()});
    }
    for (const auto& w : sc.workloads) {
        try {
            const auto layout = kmodel::build_layout(w.kernels, sc.mapping.page_size);
            if (layout.total_pages() > sc.mapping.total_pages())
                diags.push_back({Diagnostic::Severity::Error, "workloads." + w.name,
                                 "footprint exceeds physical memory"});
        } catch (const ConfigError& e) {
            diags.push_back({Diagnostic::Severity::Error, "workloads." + w.name, e.what()});
        }
    }
    return diags;
}

PolicySetup setup_policy(Policy policy, const std::vector<kmodel::KernelSpec>& kernels,
                         const kmodel::ObjectLayout& layout, const SystemShape& shape) {
    PolicySetup out;
    switch (policy) {
        case Policy::FgpOnly:
            out.plan = placement::uniform_fgp_plan(layout, shape);
            out.sched_policy = sched::SchedulerPolicy::BaselineAnyAvailable;
            return out;
        case Policy::CgpOnly:
            out.plan = placement::uniform_cgp_plan(layout, shape);
            out.sched_policy = sched::SchedulerPolicy::BaselineAnyAvailable;
            return out;
        case Policy::CgpOnlyFta:
            out.plan = placement::first_touch_plan(kernels, layout, shape);
            out.sched_policy = sched::SchedulerPolicy::Affinity;
            return out;
        case Policy::Coda: {
            std::vector<std::vector<placement::AccessAnalysis>> analyses;
            bool any_irregular = false;
            for (const auto& k : kernels) {
                analyses.push_back(placement::analyze_kernel(k));
                for (const auto& aa : analyses.back())
                    if (aa.ranged || !aa.stride.regular) any_irregular = true;
            }
            std::optional<kmodel::PageAccessHistogram> prof;
            if (any_irregular) {
                std::vector<kmodel::PageAccessHistogram> parts;
                for (const auto& k : kernels) parts.push_back(kmodel::profile(k, layout, shape));
                prof = kmodel::merge_profiles(parts);
            }
            out.plan = placement::plan(kernels, analyses, prof, layout, shape);
            // Affinity restriction only pays off when something is localized.
            out.sched_policy = out.plan.any_cgp() ? sched::SchedulerPolicy::Affinity
                                                  : sched::SchedulerPolicy::BaselineAnyAvailable;
            return out;
        }
    }
    throw ConfigError("bad policy");
}

namespace {

sim::RunInput make_input(const Scenario& sc, const sim::Workload& w, const PolicySetup& setup) {
    sim::RunInput in;
    in.workload = w;
    in.plan = setup.plan;
    in.sched_policy = setup.sched_policy;
    in.net = sc.network.to_model(sc.mapping.num_stacks);
    in.shape = sc.shape;
    in.mapping = sc.mapping;
    in.issuer = sc.issuer;
    return in;
}

sim::SimReport run_policy(const Scenario& sc, Policy policy) {
    if (is_multiprogram(sc)) {
        const auto mode = policy == Policy::FgpOnly ? placement::PlaceMode::FGP
                                                    : placement::PlaceMode::CGP;
        return sim::run_multiprogram(sc.workloads, mode,
                                     sc.network.to_model(sc.mapping.num_stacks), sc.shape,
                                     sc.mapping);
    }
    const auto& w = sc.workloads.front();
    const auto layout = kmodel::build_layout(w.kernels, sc.mapping.page_size);
    const auto setup = setup_policy(policy, w.kernels, layout, sc.shape);
    return sim::run(make_input(sc, w, setup));
}

nlohmann::ordered_json regularity_json(const Scenario& sc) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& w : sc.workloads) {
        std::vector<std::uint64_t> counts;
        for (const auto& k : w.kernels)
            for (std::uint32_t b = 0; b < k.total_blocks(); ++b)
                counts.push_back(kmodel::gen_trace(k, b).size());
        try {
            const auto est = kmodel::estimate_regularity(counts);
            j[w.name] = {{"mu", est.mu}, {"sigma", est.sigma}, {"cv", est.cv}};
        } catch (const ConfigError&) {
            j[w.name] = nullptr; // degenerate (no accesses)
        }
    }
    return j;
}

void add_speedups(std::vector<std::pair<Policy, sim::SimReport>>& reports, Policy baseline) {
    double base_cycles = 0;
    for (const auto& [p, rep] : reports)
        if (p == baseline) base_cycles = rep.cycles;
    for (auto& [p, rep] : reports) {
        rep.baseline = to_string(baseline);
        rep.speedup_vs_baseline = rep.cycles > 0 ? base_cycles / rep.cycles : 1.0;
    }
}

Policy pick_baseline(const std::vector<Policy>& policies) {
    for (auto p : policies)
        if (p == Policy::FgpOnly) return p;
    return policies.front();
}

} // namespace

ScenarioResult run_scenario(const Scenario& sc) {
    check_semantics(sc);
    ScenarioResult res;
    for (auto p : sc.policies) res.reports.emplace_back(p, run_policy(sc, p));
    const Policy baseline = pick_baseline(sc.policies);
    add_speedups(res.reports, baseline);

    const sim::SimReport* base = nullptr;
    for (const auto& [p, rep] : res.reports)
        if (p == baseline) base = &rep;

    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["seed"] = sc.seed;
    j["issuer_mode"] = to_string(sc.issuer);
    j["baseline"] = to_string(baseline);
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (auto p : sc.policies) names.push_back(to_string(p));
    j["policies"] = std::move(names);

    std::ostringstream csv;
    csv << "policy,metric,value\n";
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [p, rep] : res.reports) {
        nlohmann::ordered_json m;
        m["cycles"] = rep.cycles;
        m["local_accesses"] = rep.local.count;
        m["remote_accesses"] = rep.remote.count;
        m["host_accesses"] = rep.host.count;
        m["remote_fraction"] = rep.remote_fraction();
        m["speedup_vs_baseline"] = rep.speedup_vs_baseline;
        const double base_remote = base ? static_cast<double>(base->remote.count) : 0;
        const double reduction =
            base_remote > 0
                ? (base_remote - static_cast<double>(rep.remote.count)) / base_remote
                : 0.0;
        m["remote_reduction_vs_baseline"] = reduction;
        metrics[to_string(p)] = std::move(m);

        const std::string name = to_string(p);
        csv << name << ",cycles," << rep.cycles << '\n';
        csv << name << ",local_accesses," << rep.local.count << '\n';
        csv << name << ",remote_accesses," << rep.remote.count << '\n';
        csv << name << ",host_accesses," << rep.host.count << '\n';
        csv << name << ",remote_fraction," << rep.remote_fraction() << '\n';
        csv << name << ",speedup_vs_baseline," << rep.speedup_vs_baseline << '\n';
        csv << name << ",remote_reduction_vs_baseline," << reduction << '\n';
    }
    j["metrics"] = std::move(metrics);
    if (base) j["page_sharing"] = base->page_sharing;
    j["regularity"] = regularity_json(sc);
    res.summary = std::move(j);
    res.summary_csv = csv.str();
    return res;
}

SweepResult run_sweep(const Scenario& sc, const std::vector<double>& remote_gbps) {
    check_semantics(sc);
    SweepResult res;
    res.values_gbps = remote_gbps;
    const Policy baseline = pick_baseline(sc.policies);

    for (double v : remote_gbps) {
        Scenario variant = sc;
        variant.network.remote_gbps = v;
        std::vector<std::pair<Policy, sim::SimReport>> reports;
        for (auto p : sc.policies) reports.emplace_back(p, run_policy(variant, p));
        add_speedups(reports, baseline);
        res.reports.push_back(std::move(reports));
    }

    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["param"] = "remote_gbps";
    j["values"] = remote_gbps;
    j["baseline"] = to_string(baseline);
    nlohmann::ordered_json results = nlohmann::ordered_json::object();
    std::ostringstream csv;
    csv << "policy,remote_gbps,cycles,speedup_vs_baseline\n";
    for (std::size_t pi = 0; pi < sc.policies.size(); ++pi) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (std::size_t vi = 0; vi < remote_gbps.size(); ++vi) {
            const auto& rep = res.reports[vi][pi].second;
            arr.push_back({{"remote_gbps", remote_gbps[vi]},
                           {"cycles", rep.cycles},
                           {"speedup_vs_baseline", rep.speedup_vs_baseline}});
            csv << to_string(sc.policies[pi]) << ',' << remote_gbps[vi] << ',' << rep.cycles
                << ',' << rep.speedup_vs_baseline << '\n';
        }
        results[to_string(sc.policies[pi])] = std::move(arr);
    }
    j["results"] = std::move(results);
    res.summary = std::move(j);
    res.summary_csv = csv.str();
    return res;
}

namespace {

void write_text(const fs::path& path, const std::string& text,
                std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path.string());
    out << text;
    written.push_back(path.string());
}

} // namespace

std::vector<std::string> write_outputs(const Scenario& sc, const ScenarioResult& res,
                                       const std::string& out_dir, OutputFormat format,
                                       const DumpOptions& dumps) {
    std::vector<std::string> written;
    fs::create_directories(out_dir);
    const fs::path base(out_dir);

    if (format != OutputFormat::Csv)
        for (const auto& [p, rep] : res.reports)
            write_text(base / ("report_" + policy_slug(p) + ".json"), rep.to_json().dump(2) + "\n",
                       written);
    if (format != OutputFormat::Csv)
        write_text(base / "summary.json", res.summary.dump(2) + "\n", written);
    if (format != OutputFormat::Json)
        write_text(base / "summary.csv", res.summary_csv, written);

    if (is_multiprogram(sc)) return written; // per-policy dumps are single-workload only

    const auto& w = sc.workloads.front();
    const auto layout = kmodel::build_layout(w.kernels, sc.mapping.page_size);
    for (auto p : sc.policies) {
        const auto setup = setup_policy(p, w.kernels, layout, sc.shape);
        if (dumps.plans)
            write_text(base / ("plan_" + policy_slug(p) + ".json"),
                       setup.plan.dump_json().dump(2) + "\n", written);
        if (dumps.schedules && sc.issuer == sim::IssuerMode::Ndp) {
            const auto events = sim::schedule_of(make_input(sc, w, setup));
            std::ostringstream os;
            sched::write_schedule_csv(os, events);
            write_text(base / ("schedule_" + policy_slug(p) + ".csv"), os.str(), written);
        }
        if (dumps.allocator) {
            mem::MemoryManager mm(sc.mapping);
            placement::materialize(setup.plan, mm, 0);
            write_text(base / ("alloc_" + policy_slug(p) + ".json"),
                       mm.dump_json().dump(2) + "\n", written);
        }
    }
    if (dumps.traces) {
        for (std::size_t ki = 0; ki < w.kernels.size(); ++ki) {
            const auto& k = w.kernels[ki];
            std::vector<kmodel::TraceEntry> all;
            for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
                auto t = kmodel::gen_trace(k, b);
                all.insert(all.end(), t.begin(), t.end());
            }
            std::ostringstream os;
            kmodel::write_trace_csv(os, k, all);
            write_text(base / ("trace_" + w.name + "_k" + std::to_string(ki) + ".csv"), os.str(),
                       written);
        }
    }
    return written;
}

std::vector<std::string> write_sweep_outputs(const SweepResult& res, const std::string& out_dir,
                                             OutputFormat format) {
    std::vector<std::string> written;
    fs::create_directories(out_dir);
    const fs::path base(out_dir);
    if (format != OutputFormat::Csv)
        write_text(base / "sweep_summary.json", res.summary.dump(2) + "\n", written);
    if (format != OutputFormat::Json)
        write_text(base / "sweep_summary.csv", res.summary_csv, written);
    return written;
}

} // namespace coda::scenario
