#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "detnet/errors.hpp"
#include "detnet/experiment.hpp"

namespace {

detnet::ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw detnet::InvalidArgument("cannot read config " + path);
    auto config = detnet::config_from_json(nlohmann::json::parse(in));
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw detnet::InvalidArgument("--cap-override expects key=value, got '" + o + "'");
        config.caps.set(o.substr(0, eq), o.substr(eq + 1));
    }
    return config;
}

void configure_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("DETNET_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"Linear deterministic network experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned jobs = 1;
    std::vector<std::string> overrides;

    auto* gen = app.add_subcommand("gen", "Write the configured instances as network files");
    gen->add_option("--config", config_path, "Experiment config (JSON)")->required();
    gen->add_option("--out", out_dir, "Output directory (default: config output)");

    auto* run = app.add_subcommand("run", "Run strategies, brackets and alpha reports");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory (default: config output)");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--cap-override", overrides, "Override a search cap, key=value (repeatable)");

    auto* report = app.add_subcommand("report", "Rebuild summary.csv and print per-strategy aggregates");
    report->add_option("--out", out_dir, "Output directory of a previous run");
    report->add_option("--config", config_path, "Config whose output directory to read");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto config = load_config(config_path, {});
            const std::string dir = out_dir.empty() ? config.output : out_dir;
            const auto n = detnet::generate_networks(config, dir);
            spdlog::info("wrote {} network files to {}", n, dir);
            std::cout << n << " networks written to " << dir << "/networks\n";
            return 0;
        }
        if (run->parsed()) {
            const auto config = load_config(config_path, overrides);
            const std::string dir = out_dir.empty() ? config.output : out_dir;
            spdlog::info("running {} instances on {} threads", config.generator.count, jobs);
            const auto summary = detnet::run_experiment(config, dir, jobs);
            std::cout << summary.instances << " instances, " << summary.refusals << " refusals; reports in " << dir
                      << "\n";
            if (summary.refusals > 0) {
                spdlog::error("{} refusals recorded; see the instance reports", summary.refusals);
                return 2;
            }
            return 0;
        }
        if (report->parsed()) {
            std::string dir = out_dir;
            if (dir.empty()) {
                if (config_path.empty()) throw detnet::InvalidArgument("report needs --out or --config");
                dir = load_config(config_path, {}).output;
            }
            for (const auto& line : detnet::summarize_reports(dir)) std::cout << line << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
