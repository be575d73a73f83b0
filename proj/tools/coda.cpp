#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coda/errors.hpp"
#include "coda/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitTrace = 4;

coda::scenario::OutputFormat parse_format(const std::string& f) {
    if (f == "json") return coda::scenario::OutputFormat::Json;
    if (f == "csv") return coda::scenario::OutputFormat::Csv;
    if (f == "both") return coda::scenario::OutputFormat::Both;
    throw coda::ConfigError("--format must be json, csv or both");
}

coda::scenario::DumpOptions parse_dumps(const std::vector<std::string>& names) {
    coda::scenario::DumpOptions d;
    for (const auto& n : names) {
        if (n == "plan")
            d.plans = true;
        else if (n == "schedule")
            d.schedules = true;
        else if (n == "trace")
            d.traces = true;
        else if (n == "alloc")
            d.allocator = true;
        else if (n == "all")
            d.plans = d.schedules = d.traces = d.allocator = true;
        else
            throw coda::ConfigError("--dump accepts plan, schedule, trace, alloc or all");
    }
    return d;
}

void print_summary(const coda::scenario::ScenarioResult& res) {
    for (const auto& [p, rep] : res.reports) {
        std::printf("%-14s cycles=%.0f local=%llu remote=%llu host=%llu remote_frac=%.4f "
                    "speedup=%.3f\n",
                    coda::scenario::to_string(p), rep.cycles,
                    static_cast<unsigned long long>(rep.local.count),
                    static_cast<unsigned long long>(rep.remote.count),
                    static_cast<unsigned long long>(rep.host.count), rep.remote_fraction(),
                    rep.speedup_vs_baseline);
    }
}

int do_run(const std::string& path, const std::string& out_dir, const std::string& format,
           const std::vector<std::string>& dumps, std::uint64_t seed, bool has_seed) {
    const auto diags = coda::scenario::validate_scenario(path);
    bool bad = false;
    for (const auto& d : diags) {
        const bool err = d.severity == coda::scenario::Diagnostic::Severity::Error;
        bad = bad || err;
        std::cerr << (err ? "error" : "warning") << ": " << d.field << ": " << d.message << "\n";
    }
    if (bad) return kExitConfig;

    auto sc = coda::scenario::load_scenario(path);
    if (has_seed) sc.seed = seed;
    const auto res = coda::scenario::run_scenario(sc);
    const std::string dir = out_dir.empty() ? sc.out_dir : out_dir;
    const auto files =
        coda::scenario::write_outputs(sc, res, dir, parse_format(format), parse_dumps(dumps));
    print_summary(res);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return kExitOk;
}

int do_validate(const std::string& path) {
    const auto diags = coda::scenario::validate_scenario(path);
    bool bad = false;
    for (const auto& d : diags) {
        const bool err = d.severity == coda::scenario::Diagnostic::Severity::Error;
        bad = bad || err;
        std::cout << (err ? "error" : "warning") << ": " << d.field << ": " << d.message << "\n";
    }
    if (diags.empty()) std::cout << "ok: no diagnostics\n";
    return bad ? kExitConfig : kExitOk;
}

int do_sweep(const std::string& path, const std::string& param, std::vector<double> values,
             const std::string& out_dir, const std::string& format) {
    if (param != "remote_bw" && param != "remote_gbps")
        throw coda::ConfigError("--param supports remote_bw (GB/s values)");
    auto sc = coda::scenario::load_scenario(path);
    if (values.empty()) values = sc.sweep_remote_gbps;
    if (values.empty())
        throw coda::ConfigError("no sweep values: pass --values or set sweeps.remote_gbps");
    const auto res = coda::scenario::run_sweep(sc, values);
    const std::string dir = out_dir.empty() ? sc.out_dir : out_dir;
    const auto files = coda::scenario::write_sweep_outputs(res, dir, parse_format(format));
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coda: trace-driven simulator for multi-stack near-data processing placement"};
    app.require_subcommand(1);

    std::string path, out_dir, format = "both", param = "remote_bw";
    std::vector<std::string> dumps;
    std::vector<double> values;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run a scenario and write reports");
    run->add_option("scenario", path, "scenario file")->required();
    run->add_option("--out-dir", out_dir, "output directory (default from scenario)");
    run->add_option("--format", format, "json|csv|both")->capture_default_str();
    run->add_option("--dump", dumps, "extra dumps: plan, schedule, trace, alloc, all")
        ->delimiter(',');
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");

    auto* val = app.add_subcommand("validate", "check a scenario without running");
    val->add_option("scenario", path, "scenario file")->required();

    auto* sweep = app.add_subcommand("sweep", "re-run a scenario across remote bandwidths");
    sweep->add_option("scenario", path, "scenario file")->required();
    sweep->add_option("--param", param, "swept parameter")->capture_default_str();
    sweep->add_option("--values", values, "values in GB/s")->delimiter(',');
    sweep->add_option("--out-dir", out_dir, "output directory");
    sweep->add_option("--format", format, "json|csv|both");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(path, out_dir, format, dumps, seed, !seed_opt->empty());
        if (val->parsed()) return do_validate(path);
        if (sweep->parsed()) return do_sweep(path, param, values, out_dir, format);
    } catch (const coda::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const coda::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const coda::TraceError& e) {
        std::cerr << "trace error: " << e.what() << "\n";
        return kExitTrace;
    }
    return kExitOk;
}
