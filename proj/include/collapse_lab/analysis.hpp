#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/grw.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

// L2 distance between two states restricted to a spatial interval, each
// renormalized inside the interval. Zero means the branch kept its shape;
// weight suppression alone does not register. Single-particle states only.
inline double distortion_metric(const WaveFunction& collapsed, const WaveFunction& reference,
                                std::pair<double, double> region) {
    if (!(collapsed.grid() == reference.grid()))
        throw IncompatibilityError("distortion across different grids");
    const GridSpec& grid = collapsed.grid();
    if (grid.num_particles != 1)
        throw UnsupportedArityError("distortion metric is defined for single-particle states");
    if (!(region.first < region.second)) throw DomainError("region interval is inverted");
    const auto& a = collapsed.amplitudes();
    const auto& b = reference.amplitudes();
    double weight_a = 0.0, weight_b = 0.0;
    for (int k = 0; k < grid.points_per_axis; ++k) {
        const double q = grid.coord(k);
        if (q < region.first || q > region.second) continue;
        weight_a += std::norm(a[static_cast<std::size_t>(k)]);
        weight_b += std::norm(b[static_cast<std::size_t>(k)]);
    }
    weight_a *= grid.spacing();
    weight_b *= grid.spacing();
    if (!(weight_a > 1e-14) || !(weight_b > 1e-14))
        throw UndefinedBranchError("branch weight below 1e-14 in the comparison region");
    const double scale_a = 1.0 / std::sqrt(weight_a);
    const double scale_b = 1.0 / std::sqrt(weight_b);
    double sum = 0.0;
    for (int k = 0; k < grid.points_per_axis; ++k) {
        const double q = grid.coord(k);
        if (q < region.first || q > region.second) continue;
        sum += std::norm(scale_a * a[static_cast<std::size_t>(k)] -
                         scale_b * b[static_cast<std::size_t>(k)]);
    }
    return std::sqrt(sum * grid.spacing());
}

// ||psi - S psi|| with S the label swap; zero exactly on symmetric states.
inline double symmetry_violation(const WaveFunction& psi) {
    if (psi.grid().num_particles != 2)
        throw UnsupportedArityError("symmetry violation is measured pairwise (N = 2)");
    return l2_distance(psi, swap_labels(psi, 0, 1));
}

// A flash: the space-time point of one collapse event.
struct Flash {
    double time = 0.0;
    double center = 0.0;
};

inline std::vector<Flash> export_flashes(const std::vector<CollapseEvent>& events) {
    std::vector<Flash> flashes;
    flashes.reserve(events.size());
    for (const CollapseEvent& event : events) flashes.push_back({event.time, event.center});
    return flashes;
}

// Ensemble-averaged coherence between two probe points:
// |mean psi(qL) psi*(qR)| normalized by the averaged densities at the probes,
// sampled at evenly spaced times.
struct DecoherenceCurve {
    std::vector<double> times;
    std::vector<double> coherence;
    int replicas = 0;
    double initial_coherence = 0.0;
    int probe_left_site = 0;
    int probe_right_site = 0;
};

struct ScanSettings {
    double duration = 1.0;
    double dt = 1e-3;
    int output_points = 26;  // t = 0 inclusive
    int replicas = 1000;
    double probe_left = 0.0;
    double probe_right = 0.0;
    std::uint64_t seed = 1;
    int threads = 0;
};

namespace detail {

inline std::vector<double> even_times(double duration, int points) {
    std::vector<double> times(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        times[static_cast<std::size_t>(i)] =
            points > 1 ? duration * static_cast<double>(i) / (points - 1) : 0.0;
    return times;
}

struct ReplicaProbeStats {
    std::vector<Complex> product_sum;
    std::vector<double> left_sum;
    std::vector<double> right_sum;
    std::vector<double> max_jump;  // per replica, when a partition is given
    std::vector<double> all_jumps;
};

}  // namespace detail

// Monte Carlo estimate of the off-diagonal decay under the jump process.
// Each replica runs the full GRW process with a derived seed; the fold over
// replicas is ordered, so thread count does not change the result.
inline DecoherenceCurve decoherence_scan(const WaveFunction& psi0, const HamiltonianSpec& ham,
                                         const GrwParams& params, const ScanSettings& settings,
                                         const RegionPartition* partition = nullptr,
                                         std::vector<double>* event_jumps = nullptr) {
    const GridSpec& grid = psi0.grid();
    if (grid.num_particles != 1)
        throw UnsupportedArityError("the decoherence scan probes single-particle states");
    if (settings.replicas < 1) throw DomainError("need at least one replica");
    const std::vector<double> times = detail::even_times(settings.duration, settings.output_points);
    const int left_site = grid.nearest_site(settings.probe_left);
    const int right_site = grid.nearest_site(settings.probe_right);

    const auto points = static_cast<std::size_t>(settings.output_points);
    std::vector<std::vector<Complex>> products(static_cast<std::size_t>(settings.replicas));
    std::vector<std::vector<double>> lefts(static_cast<std::size_t>(settings.replicas));
    std::vector<std::vector<double>> rights(static_cast<std::size_t>(settings.replicas));
    std::vector<std::vector<double>> jumps(static_cast<std::size_t>(settings.replicas));

    parallel_for(static_cast<std::size_t>(settings.replicas), effective_threads(settings.threads),
                 [&](std::size_t r) {
                     GrwRunOptions options;
                     options.probe_times = times;
                     options.probe_sites = {left_site, right_site};
                     options.partition = partition;
                     GrwRunResult run = run_grw(psi0, ham, params, settings.duration, settings.dt,
                                                derive_seed(settings.seed, r), options);
                     products[r] = std::move(run.probe_products);
                     lefts[r] = std::move(run.probe_left_density);
                     rights[r] = std::move(run.probe_right_density);
                     if (partition != nullptr) {
                         for (const CollapseEvent& event : run.events) {
                             double jump = 0.0;
                             for (std::size_t k = 0; k < event.pre_weights.size(); ++k)
                                 jump = std::max(jump, std::abs(event.post_weights[k] -
                                                                event.pre_weights[k]));
                             jumps[r].push_back(jump);
                         }
                     }
                 });

    DecoherenceCurve curve;
    curve.times = times;
    curve.replicas = settings.replicas;
    curve.probe_left_site = left_site;
    curve.probe_right_site = right_site;
    curve.coherence.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        Complex product_sum{0.0, 0.0};
        double left_sum = 0.0, right_sum = 0.0;
        for (int r = 0; r < settings.replicas; ++r) {
            product_sum += products[static_cast<std::size_t>(r)][i];
            left_sum += lefts[static_cast<std::size_t>(r)][i];
            right_sum += rights[static_cast<std::size_t>(r)][i];
        }
        const double denom = std::sqrt(left_sum * right_sum);
        curve.coherence[i] = denom > 0.0 ? std::abs(product_sum) / denom : 0.0;
    }
    curve.initial_coherence = curve.coherence.front();
    if (event_jumps != nullptr) {
        event_jumps->clear();
        for (const auto& replica_jumps : jumps)
            event_jumps->insert(event_jumps->end(), replica_jumps.begin(), replica_jumps.end());
    }
    return curve;
}

// Weighted least-squares slope of log coherence over the window where the
// curve stays above floor_fraction of its initial value; returns the decay
// rate. Weights g^2 reflect the delta-method variance of log of a noisy
// mean, so deep-decay points do not dominate the fit.
inline double fit_decay_rate(const DecoherenceCurve& curve, double floor_fraction = 0.1) {
    const double floor = floor_fraction * curve.initial_coherence;
    double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double g = curve.coherence[i];
        if (!(g > floor) || !(g > 0.0)) continue;
        const double w = g * g;
        const double y = std::log(g);
        sw += w;
        st += w * curve.times[i];
        sy += w * y;
        stt += w * curve.times[i] * curve.times[i];
        sty += w * curve.times[i] * y;
        ++used;
    }
    if (used < 2) throw DomainError("too few usable points for a decay fit");
    const double denom = sw * stt - st * st;
    if (!(std::abs(denom) > 0.0)) throw DomainError("degenerate time grid in decay fit");
    return -(sw * sty - st * sy) / denom;
}

inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = p * (static_cast<double>(values.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - std::floor(pos);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

// One level of the frequency-scaling scan: parameters (k lambda, alpha / k)
// keep the small-separation decay rate lambda alpha s^2 / 2 invariant while
// the per-hit branch-weight jumps shrink.
struct ContinuumLevel {
    int level = 1;
    GrwParams params;
    DecoherenceCurve curve;
    double fitted_rate = 0.0;
    double max_weight_jump = 0.0;
    double p99_weight_jump = 0.0;
};

inline std::vector<ContinuumLevel> continuum_limit_scan(const WaveFunction& psi0,
                                                        const HamiltonianSpec& ham,
                                                        const GrwParams& base,
                                                        const std::vector<int>& levels,
                                                        const RegionPartition& partition,
                                                        const ScanSettings& settings) {
    std::vector<ContinuumLevel> result;
    result.reserve(levels.size());
    for (int level : levels) {
        if (level < 1) throw DomainError("scaling levels must be positive");
        ContinuumLevel entry;
        entry.level = level;
        entry.params = base;
        entry.params.lambda_rate = base.lambda_rate * level;
        entry.params.alpha = base.alpha / level;
        std::vector<double> jumps;
        entry.curve = decoherence_scan(psi0, ham, entry.params, settings, &partition, &jumps);
        entry.fitted_rate = fit_decay_rate(entry.curve);
        for (double jump : jumps) entry.max_weight_jump = std::max(entry.max_weight_jump, jump);
        entry.p99_weight_jump = percentile(jumps, 0.99);
        result.push_back(std::move(entry));
    }
    return result;
}

}  // namespace collapse_lab
