// vthing: serve virtual Web of Things devices from their Thing Descriptions,
// and probe any WoT HTTP endpoint against its TD.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "vthing/vthing.hpp"

namespace {

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

spdlog::level::level_enum to_spdlog(vthing::LogLevel level)
{
    switch (level) {
    case vthing::LogLevel::Error: return spdlog::level::err;
    case vthing::LogLevel::Warn: return spdlog::level::warn;
    case vthing::LogLevel::Info: return spdlog::level::info;
    case vthing::LogLevel::Debug: return spdlog::level::debug;
    }
    return spdlog::level::info;
}

struct RunArgs {
    std::vector<std::string> td_paths;
    std::optional<std::string> config_path;
    vthing::ConfigOverrides flags;
    std::vector<std::string> event_intervals;
};

int run(RunArgs& args)
{
    // Block termination signals before any thread starts; sigwait below picks them up.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    vthing::ServientConfig config;
    try {
        for (const auto& entry : args.event_intervals) {
            auto eq = entry.rfind('=');
            if (eq == std::string::npos || eq == 0)
                throw vthing::Error(vthing::Errc::InvalidConfig, "--event-interval expects NAME=SECONDS, got '" + entry + "'");
            std::size_t used = 0;
            std::string number = entry.substr(eq + 1);
            double seconds = 0;
            try {
                seconds = std::stod(number, &used);
            } catch (const std::logic_error&) {
                used = 0;
            }
            if (used == 0 || used != number.size())
                throw vthing::Error(vthing::Errc::InvalidConfig, "--event-interval expects NAME=SECONDS, got '" + entry + "'");
            args.flags.event_intervals[entry.substr(0, eq)] = seconds;
        }
        std::optional<vthing::Json> file;
        if (args.config_path) {
            try {
                file = vthing::parse_json(read_file(*args.config_path));
            } catch (const std::exception& e) {
                throw vthing::Error(vthing::Errc::InvalidConfig, *args.config_path + ": " + e.what());
            }
        }
        config = vthing::resolve_config(file, args.flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    spdlog::set_level(to_spdlog(config.log_level));

    vthing::Servient servient(config);
    for (const auto& path : args.td_paths) {
        try {
            vthing::ParseDiagnostics diag;
            auto td = vthing::parse_td(read_file(path), &diag);
            for (const auto& w : diag.warnings)
                spdlog::warn("{}: {}", path, w);
            servient.attach(std::move(td));
        } catch (const std::exception& e) {
            std::cerr << "error: " << path << ": " << e.what() << "\n";
            return 1;
        }
    }

    std::unique_ptr<vthing::HttpServer> server;
    try {
        server = vthing::serve(servient);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& thing : servient.things())
        spdlog::info("serving '{}' at {}", thing->title(), thing->thing_url());
    for (const auto& route : server->route_list())
        spdlog::info("  {}", route);
    if (config.seed)
        spdlog::info("seed {}", *config.seed);

    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("shutting down");
    server->stop();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Virtualize Web of Things devices from their Thing Descriptions"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Serve one or more Thing Descriptions as virtual things");
    run_cmd->add_option("td", run_args.td_paths, "Thing Description files")->required();
    run_cmd->add_option("--address", run_args.flags.address, "Listen address (default 127.0.0.1)");
    run_cmd->add_option("--port", run_args.flags.port, "Listen port (default 8080)");
    run_cmd->add_option("--event-mode", run_args.flags.event_mode, "none | random | fixed:SECONDS (default random)");
    run_cmd->add_option("--event-interval", run_args.event_intervals, "Per-event fixed interval, NAME=SECONDS (repeatable)")
        ->take_all();
    run_cmd->add_option("--seed", run_args.flags.seed, "Seed for reproducible data");
    run_cmd->add_option("--config", run_args.config_path, "JSON config file; flags override it");
    run_cmd->add_option("--log-level", run_args.flags.log_level, "error | warn | info | debug");

    vthing::ProbeOptions probe_options;
    bool probe_json = false;
    auto* probe_cmd = app.add_subcommand("probe", "Exercise a Thing through its TD and report PASS/FAIL per affordance");
    probe_cmd->add_option("target", probe_options.target, "TD URL (http://...) or TD file")->required();
    probe_cmd->add_option("--duration", probe_options.duration_seconds, "Seconds to listen on each event (default 10)")
        ->check(CLI::PositiveNumber);
    probe_cmd->add_option("--seed", probe_options.seed, "Seed for generated inputs");
    probe_cmd->add_flag("--json", probe_json, "Print the report as JSON");

    CLI11_PARSE(app, argc, argv);

    if (*run_cmd)
        return run(run_args);

    auto report = vthing::probe(probe_options);
    if (probe_json && report.exit_code != 2)
        std::cout << vthing::report_to_json(report).dump(2) << "\n";
    else if (report.exit_code == 2)
        std::cerr << vthing::format_report(report);
    else
        std::cout << vthing::format_report(report);
    return report.exit_code;
}
