// cflow: simulate | certify-speed | probe-q | analyze | exact-sphere
//
// Exit status: 0 all verdicts pass (or informational), 1 some verdict failed
// or a numerical error stopped the command, 2 usage, configuration or I/O error.
#include "cflow/analysis.hpp"
#include "cflow/history_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace cflow;

namespace {

void print_reports(const std::vector<MonitorReport> &reports)
{
    for (const MonitorReport &r : reports)
        std::printf("%-36s %-13s %s\n", r.name.c_str(), to_string(r.verdict).c_str(), r.detail.c_str());
}

int verdict_status(const std::vector<MonitorReport> &reports, bool informational_only)
{
    return any_failed(reports) && !informational_only ? 1 : 0;
}

RunConfig load(const std::string &path, const std::string &command)
{
    RunConfig cfg = parse_config(read_text(path));
    if (cfg.command != command)
        throw ConfigError("config.command: is '" + cfg.command + "' but the '" + command + "' command was invoked");
    return cfg;
}

void echo(const RunConfig &cfg, const std::string &dir)
{
    const std::string text = emit_config(cfg);
    std::cout << text;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        write_text((std::filesystem::path(dir) / "config.json").string(), text);
    }
}

}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Numerical laboratory for fully nonlinear curvature flows"};
    app.require_subcommand(1);
    bool informational_only = false;
    app.add_flag("--informational-only", informational_only, "Exit 0 even when a verdict fails");

    std::string config, output, input;
    auto *sim = app.add_subcommand("simulate", "Run a flow and evaluate monitors");
    sim->add_option("-c,--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--output", output, "History directory")->required();

    auto *cert = app.add_subcommand("certify-speed", "Sample the structural properties of a speed");
    cert->add_option("-c,--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cert->add_option("-o,--output", output, "Report directory");

    auto *probe = app.add_subcommand("probe-q", "Sample the signs of the pinching quadratic forms");
    probe->add_option("-c,--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    probe->add_option("-o,--output", output, "Report directory");

    auto *analyze = app.add_subcommand("analyze", "Evaluate monitors over a stored history");
    analyze->add_option("-i,--input", input, "History directory")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("-c,--config", config, "Override the stored monitor selection")->check(CLI::ExistingFile);

    int count = 25;
    double fraction = 0.9;
    auto *fixture = app.add_subcommand("exact-sphere", "Write the history of an exactly shrinking sphere");
    fixture->add_option("-c,--config", config, "Run configuration (JSON); shape must be a sphere")
        ->required()
        ->check(CLI::ExistingFile);
    fixture->add_option("-o,--output", output, "History directory")->required();
    fixture->add_option("--count", count, "Number of snapshots")->check(CLI::Range(3, 100000));
    fixture->add_option("--fraction", fraction, "Last snapshot time as a fraction of the extinction time")
        ->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            RunConfig cfg = load(config, "simulate");
            cfg.output = output;
            echo(cfg, output);
            FlowHistory h = run(cfg.flow);
            std::printf("termination: %s %s (%ld steps, %d remeshes, %zu snapshots)\n", h.termination.c_str(),
                        h.termination_detail.c_str(), h.steps, h.remeshes, h.entries.size());
            write_history(h, cfg, output);
            auto reports = run_monitors(cfg, h);
            write_reports(reports, output);
            print_reports(reports);
            return verdict_status(reports, informational_only);
        }
        if (*cert) {
            RunConfig cfg = load(config, "certify-speed");
            echo(cfg, output);
            auto reports = run_certification(cfg);
            if (!output.empty()) write_reports(reports, output);
            print_reports(reports);
            return verdict_status(reports, informational_only);
        }
        if (*probe) {
            RunConfig cfg = load(config, "probe-q");
            echo(cfg, output);
            auto reports = run_probes(cfg);
            if (!output.empty()) write_reports(reports, output);
            print_reports(reports);
            return verdict_status(reports, informational_only);
        }
        if (*analyze) {
            StoredHistory stored = read_history(input);
            RunConfig cfg = stored.config;
            if (!config.empty()) {
                RunConfig over = load(config, "analyze");
                cfg.monitors = over.monitors;
                cfg.pinching = over.pinching;
                if (over.seed) cfg.seed = over.seed;
            }
            auto reports = run_monitors(cfg, stored.history);
            write_reports(reports, input);
            print_reports(reports);
            return verdict_status(reports, informational_only);
        }
        if (*fixture) {
            RunConfig cfg = parse_config(read_text(config));
            cfg.command = "analyze";
            cfg.output = output;
            const double T = sphere_extinction_time(cfg.flow);
            FlowHistory h = exact_sphere_history(cfg.flow, count, fraction * T);
            write_history(h, cfg, output);
            std::printf("wrote %zu snapshots of the exact sphere (extinction time %.17g) to %s\n", h.entries.size(),
                        T, output.c_str());
            return 0;
        }
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error &e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const IoError &e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
