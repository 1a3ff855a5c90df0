#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "collapse_lab/bohm.hpp"
#include "collapse_lab/csl.hpp"
#include "collapse_lab/csv.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/grw.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/scenario.hpp"
#include "collapse_lab/split_step.hpp"

namespace collapse_lab {

struct ManifestEntry {
    std::string name;
    std::size_t rows = 0;
    std::string hash;
};

// Everything one run produced: the echoed config, per-replica seeds, wall
// time, the output manifest, and any per-replica failures (recorded, never
// silently dropped).
struct RunRecord {
    std::string config_echo;
    std::vector<std::uint64_t> replica_seeds;
    double wall_seconds = 0.0;
    std::vector<ManifestEntry> manifest;
    std::vector<std::string> replica_errors;
    std::vector<std::string> warnings;
};

namespace detail {

struct Artifact {
    std::string name;
    std::string content;
    std::size_t rows = 0;
};

inline std::string replica_tag(std::size_t index) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "r%04zu", index);
    return buffer;
}

inline std::string snapshot_tag(std::size_t index) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "s%04zu", index);
    return buffer;
}

inline Artifact matter_artifact(const std::string& name, const MatterDensityField& field) {
    CsvBuilder csv("x,m");
    for (std::size_t k = 0; k < field.axis.size(); ++k)
        csv.add_row({field.axis[k], field.density[k]});
    return {name, csv.content(), csv.rows()};
}

inline std::vector<double> snapshot_times(double cadence, double duration) {
    std::vector<double> times;
    if (cadence <= 0.0) return times;
    const auto count = static_cast<std::size_t>(std::floor(duration / cadence + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) times.push_back(cadence * static_cast<double>(i));
    return times;
}

}  // namespace detail

// Executes the configured process for all replicas, with replica seeds
// derived from (master seed, index). Replicas fan out over threads; outputs
// are merged in replica order, so the result is independent of the
// concurrency level. config_dir anchors relative output paths.
inline RunRecord run_scenario(const ScenarioConfig& config,
                              const std::filesystem::path& config_dir = ".") {
    const auto start_time = std::chrono::steady_clock::now();
    {
        const std::vector<ConfigError> errors = validate_config(config);
        if (!errors.empty()) {
            std::string message = "invalid scenario config:";
            for (const auto& e : errors) message += "\n  " + e.to_string();
            throw DomainError(message);
        }
    }
    std::filesystem::path out_dir(config.run.output_dir);
    if (out_dir.is_relative()) out_dir = config_dir / out_dir;
    std::error_code fs_error;
    std::filesystem::create_directories(out_dir, fs_error);
    if (fs_error) throw IoError("cannot create output directory " + out_dir.string());
    {
        std::ofstream probe(out_dir / ".write_probe", std::ios::binary);
        if (!probe) throw IoError("output directory is not writable: " + out_dir.string());
    }
    std::filesystem::remove(out_dir / ".write_probe", fs_error);

    const GridSpec grid = make_grid(config);
    const WaveFunction psi0 = make_initial_state(config, grid);
    const HamiltonianSpec ham = make_hamiltonian(config);
    std::optional<RegionPartition> partition;
    if (!config.analysis.regions.empty()) partition.emplace(config.analysis.regions);

    RunRecord record;
    record.config_echo = serialize_config(config);
    const auto replicas = static_cast<std::size_t>(config.run.replicas);
    for (std::size_t r = 0; r < replicas; ++r)
        record.replica_seeds.push_back(derive_seed(config.run.seed, r));

    const std::vector<double> marks =
        detail::snapshot_times(config.analysis.snapshot_cadence, config.dynamics.duration);

    // Per-replica artifact bundles, merged in index order after the fan-out.
    std::vector<std::vector<detail::Artifact>> bundles(replicas);
    std::vector<std::string> failures(replicas);
    std::vector<std::vector<std::string>> warnings(replicas);
    const int threads = effective_threads(config.run.threads);

    using ProcessType = ScenarioConfig::Process::Type;
    auto run_replica = [&](std::size_t r) {
        const std::uint64_t seed = record.replica_seeds[r];
        const std::string tag = detail::replica_tag(r);
        std::vector<detail::Artifact>& bundle = bundles[r];
        switch (config.process.type) {
            case ProcessType::unitary: {
                // Deterministic reference evolution; snapshots via segmentwise evolve.
                WaveFunction psi = psi0;
                if (marks.empty()) {
                    psi = evolve(psi, ham, config.dynamics.duration, config.dynamics.dt);
                } else {
                    double now = 0.0;
                    std::size_t index = 0;
                    for (double t : marks) {
                        psi = evolve(psi, ham, t - now, config.dynamics.dt);
                        now = t;
                        bundle.push_back(detail::matter_artifact(
                            "matter_" + tag + "_" + detail::snapshot_tag(index) + ".csv",
                            matter_density(psi)));
                        ++index;
                    }
                    if (now < config.dynamics.duration)
                        psi = evolve(psi, ham, config.dynamics.duration - now, config.dynamics.dt);
                }
                bundle.push_back(
                    detail::matter_artifact("matter_" + tag + "_final.csv", matter_density(psi)));
                if (boundary_mass(psi) > 1e-6)
                    warnings[r].push_back(tag + ": final state boundary mass above 1e-6");
                break;
            }
            case ProcessType::grw: {
                GrwRunOptions options;
                options.snapshot_times = marks;
                options.partition = partition.has_value() ? &*partition : nullptr;
                options.event_cap = config.process.event_cap;
                const GrwRunResult result =
                    run_grw(psi0, ham, make_grw_params(config), config.dynamics.duration,
                            config.dynamics.dt, seed, options);
                CsvBuilder events("t,i,x");
                for (const CollapseEvent& event : result.events)
                    events.add_row_raw(format_double(event.time) + "," +
                                       std::to_string(event.particle) + "," +
                                       format_double(event.center));
                bundle.push_back({"events_" + tag + ".csv", events.content(), events.rows()});
                CsvBuilder flashes("t,x");
                for (const CollapseEvent& event : result.events)
                    flashes.add_row({event.time, event.center});
                bundle.push_back({"flashes_" + tag + ".csv", flashes.content(), flashes.rows()});
                std::size_t index = 0;
                for (const auto& [t, field] : result.snapshots) {
                    bundle.push_back(detail::matter_artifact(
                        "matter_" + tag + "_" + detail::snapshot_tag(index) + ".csv", field));
                    ++index;
                }
                for (const std::string& w : result.warnings) warnings[r].push_back(tag + ": " + w);
                break;
            }
            case ProcessType::csl: {
                CslRunOptions options;
                options.partition = partition.has_value() ? &*partition : nullptr;
                const CslRunResult result = run_csl(psi0, ham, make_csl_params(config),
                                                    config.dynamics.duration, seed, options);
                std::string header = "t";
                const std::size_t region_count = partition.has_value() ? partition->size() : 0;
                for (std::size_t k = 1; k <= region_count; ++k)
                    header += ",w_region_" + std::to_string(k);
                CsvBuilder trace(header);
                for (std::size_t i = 0; i < result.times.size(); ++i) {
                    std::vector<double> row{result.times[i]};
                    for (double w : result.weights[i]) row.push_back(w);
                    trace.add_row(row);
                }
                bundle.push_back({"weights_" + tag + ".csv", trace.content(), trace.rows()});
                for (const std::string& w : result.warnings) warnings[r].push_back(tag + ": " + w);
                break;
            }
            case ProcessType::bohm: {
                Trajectory trajectory;
                if (!config.process.bohm_q0.empty()) {
                    trajectory = run_bohm(psi0, ham, ParticleConfiguration{config.process.bohm_q0},
                                          config.dynamics.duration, config.dynamics.dt);
                } else {
                    const auto starts = sample_quantum_equilibrium(psi0, 1, seed);
                    trajectory = run_bohm(psi0, ham, starts.front(), config.dynamics.duration,
                                          config.dynamics.dt);
                }
                std::string header = "t";
                for (int p = 1; p <= grid.num_particles; ++p)
                    header += ",Q_" + std::to_string(p);
                CsvBuilder csv(header);
                for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
                    std::vector<double> row{trajectory.times[i]};
                    for (double q : trajectory.configurations[i].positions) row.push_back(q);
                    csv.add_row(row);
                }
                bundle.push_back({"trajectory_" + tag + ".csv", csv.content(), csv.rows()});
                if (trajectory.status == Trajectory::Status::node_abort)
                    warnings[r].push_back(tag + ": trajectory aborted near a node");
                break;
            }
        }
    };

    parallel_for(replicas, threads, [&](std::size_t r) {
        try {
            run_replica(r);
        } catch (const SimulationError& e) {
            failures[r] = e.what();
            bundles[r].clear();
        }
    });

    // Deterministic merge and write-out, single-threaded.
    std::vector<detail::Artifact> artifacts;
    for (std::size_t r = 0; r < replicas; ++r) {
        for (auto& artifact : bundles[r]) artifacts.push_back(std::move(artifact));
        if (!failures[r].empty())
            record.replica_errors.push_back("replica " + std::to_string(r) + ": " + failures[r]);
        for (const std::string& w : warnings[r]) record.warnings.push_back(w);
    }

    CsvBuilder manifest("name,rows,fnv1a64");
    for (const detail::Artifact& artifact : artifacts) {
        std::ofstream out(out_dir / artifact.name, std::ios::binary);
        if (!out) throw IoError("cannot write " + (out_dir / artifact.name).string());
        out << artifact.content;
        const std::string hash = to_hex(fnv1a64(artifact.content));
        record.manifest.push_back({artifact.name, artifact.rows, hash});
        manifest.add_row_raw(artifact.name + "," + std::to_string(artifact.rows) + "," + hash);
    }
    {
        std::ofstream out(out_dir / "manifest", std::ios::binary);
        if (!out) throw IoError("cannot write the manifest");
        out << manifest.content();
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    {
        nlohmann::json j;
        j["config"] = record.config_echo;
        j["replica_seeds"] = record.replica_seeds;
        j["wall_seconds"] = record.wall_seconds;
        j["replica_errors"] = record.replica_errors;
        j["warnings"] = record.warnings;
        nlohmann::json files = nlohmann::json::array();
        for (const ManifestEntry& entry : record.manifest)
            files.push_back({{"name", entry.name}, {"rows", entry.rows}, {"hash", entry.hash}});
        j["manifest"] = files;
        std::ofstream out(out_dir / "run_record.json", std::ios::binary);
        if (!out) throw IoError("cannot write run_record.json");
        out << j.dump(2) << "\n";
    }
    return record;
}

}  // namespace collapse_lab
