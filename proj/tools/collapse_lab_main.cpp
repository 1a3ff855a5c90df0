// Command-line front end: validate and run scenario configs, drive the
// frequency-scaling decoherence scan, report the version.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collapse_lab/collapse_lab.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

int load_config(const std::string& path, collapse_lab::ParseResult& parsed,
                std::filesystem::path& config_dir) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return 1;
    }
    std::ostringstream text;
    text << in.rdbuf();
    parsed = collapse_lab::parse_config(text.str());
    config_dir = std::filesystem::path(path).parent_path();
    if (config_dir.empty()) config_dir = ".";
    if (!parsed.ok()) {
        for (const auto& error : parsed.errors) std::cerr << path << ": " << error.to_string() << "\n";
        return 1;
    }
    return 0;
}

int run_command(const std::string& path) {
    collapse_lab::ParseResult parsed;
    std::filesystem::path config_dir;
    if (const int rc = load_config(path, parsed, config_dir); rc != 0) return rc;
    try {
        const collapse_lab::RunRecord record = collapse_lab::run_scenario(*parsed.config, config_dir);
        for (const auto& warning : record.warnings) std::cerr << "warning: " << warning << "\n";
        for (const auto& error : record.replica_errors) std::cerr << "error: " << error << "\n";
        std::cout << record.manifest.size() << " output file(s), "
                  << collapse_lab::format_double(record.wall_seconds) << " s\n";
        return record.replica_errors.empty() ? 0 : 2;
    } catch (const collapse_lab::SimulationError& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
}

int validate_command(const std::string& path) {
    collapse_lab::ParseResult parsed;
    std::filesystem::path config_dir;
    if (const int rc = load_config(path, parsed, config_dir); rc != 0) return rc;
    std::cout << "OK\n";
    return 0;
}

int scan_command(const std::string& path, const std::vector<int>& levels, int replicas) {
    collapse_lab::ParseResult parsed;
    std::filesystem::path config_dir;
    if (const int rc = load_config(path, parsed, config_dir); rc != 0) return rc;
    const collapse_lab::ScenarioConfig& config = *parsed.config;
    if (config.process.type != collapse_lab::ScenarioConfig::Process::Type::grw) {
        std::cerr << "error: the scan driver needs a grw process config\n";
        return 1;
    }
    if (!config.analysis.probes.has_value() || config.analysis.regions.empty()) {
        std::cerr << "error: the scan driver needs [analysis] probes and regions\n";
        return 1;
    }
    try {
        const collapse_lab::GridSpec grid = collapse_lab::make_grid(config);
        const collapse_lab::WaveFunction psi0 = collapse_lab::make_initial_state(config, grid);
        const collapse_lab::HamiltonianSpec ham = collapse_lab::make_hamiltonian(config);
        const collapse_lab::RegionPartition partition(config.analysis.regions);
        collapse_lab::ScanSettings settings;
        settings.duration = config.dynamics.duration;
        settings.dt = config.dynamics.dt;
        settings.replicas = replicas > 0 ? replicas : config.run.replicas;
        settings.probe_left = config.analysis.probes->first;
        settings.probe_right = config.analysis.probes->second;
        settings.seed = config.run.seed;
        settings.threads = config.run.threads;
        const auto scan = collapse_lab::continuum_limit_scan(
            psi0, ham, collapse_lab::make_grw_params(config), levels, partition, settings);

        std::filesystem::path out_dir(config.run.output_dir);
        if (out_dir.is_relative()) out_dir = config_dir / out_dir;
        std::filesystem::create_directories(out_dir);
        collapse_lab::CsvBuilder table("k,rate,max_jump");
        for (const auto& level : scan) {
            collapse_lab::CsvBuilder curve("t,coherence");
            for (std::size_t i = 0; i < level.curve.times.size(); ++i)
                curve.add_row({level.curve.times[i], level.curve.coherence[i]});
            std::ofstream out(out_dir / ("decoherence_k" + std::to_string(level.level) + ".csv"),
                              std::ios::binary);
            out << curve.content();
            table.add_row_raw(std::to_string(level.level) + "," +
                              collapse_lab::format_double(level.fitted_rate) + "," +
                              collapse_lab::format_double(level.max_weight_jump));
            std::cout << "level " << level.level << ": rate "
                      << collapse_lab::format_double(level.fitted_rate) << ", max jump "
                      << collapse_lab::format_double(level.max_weight_jump) << ", p99 jump "
                      << collapse_lab::format_double(level.p99_weight_jump) << "\n";
        }
        std::ofstream out(out_dir / "scan_table.csv", std::ios::binary);
        out << table.content();
        return 0;
    } catch (const collapse_lab::SimulationError& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collapse-lab: a lattice laboratory for matter-density collapse dynamics"};
    app.require_subcommand(1);

    std::string run_config, validate_config_path, scan_config;
    std::vector<int> levels{1, 2, 4, 8};
    int scan_replicas = 0;

    CLI::App* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("config", run_config, "scenario file")->required();

    CLI::App* validate = app.add_subcommand("validate", "check a scenario config");
    validate->add_option("config", validate_config_path, "scenario file")->required();

    CLI::App* scan = app.add_subcommand("scan", "frequency-scaling decoherence scan");
    scan->add_option("config", scan_config, "grw scenario file")->required();
    scan->add_option("--levels", levels, "scaling levels (default 1 2 4 8)");
    scan->add_option("--replicas", scan_replicas, "replicas per level (default: run block)");

    CLI::App* version = app.add_subcommand("version", "print the version");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(run_config);
    if (validate->parsed()) return validate_command(validate_config_path);
    if (scan->parsed()) return scan_command(scan_config, levels, scan_replicas);
    if (version->parsed()) {
        std::cout << "collapse-lab " << kVersion << "\n";
        return 0;
    }
    return 0;
}
