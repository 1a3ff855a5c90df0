#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/split_step.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

// Actual particle positions inside the box (periodically wrapped).
struct ParticleConfiguration {
    std::vector<double> positions;
};

// Integrated guidance path. node_abort marks a path truncated because the
// state stayed too close to a wavefunction node after retries.
struct Trajectory {
    enum class Status { complete, node_abort };

    std::vector<double> times;
    std::vector<ParticleConfiguration> configurations;
    Status status = Status::complete;
};

namespace detail {

inline double wrap_position(double q, double box_length) {
    const double half = 0.5 * box_length;
    double u = std::fmod(q + half, box_length);
    if (u < 0.0) u += box_length;
    return u - half;
}

// Evaluates psi and its centered-difference gradient at a configuration-space
// point by multilinear interpolation. Returns false when the local density
// falls below the node threshold relative to the state's density peak.
inline bool guidance_probe(const GridSpec& grid, const std::vector<Complex>& amp, double peak,
                           std::span<const double> positions, std::span<const double> masses,
                           std::span<double> velocity_out) {
    const int n = grid.num_particles;
    const auto m = static_cast<std::size_t>(grid.points_per_axis);
    const double spacing = grid.spacing();
    std::size_t base[8];
    double frac[8];
    for (int p = 0; p < n; ++p) {
        const double q = wrap_position(positions[static_cast<std::size_t>(p)], grid.box_length);
        const double cell = (q + 0.5 * grid.box_length) / spacing;
        const double floor_cell = std::floor(cell);
        frac[p] = cell - floor_cell;
        auto k = static_cast<long long>(floor_cell) % static_cast<long long>(m);
        if (k < 0) k += static_cast<long long>(m);
        base[p] = static_cast<std::size_t>(k);
    }
    Complex value{0.0, 0.0};
    Complex gradient[8];
    for (int p = 0; p < n; ++p) gradient[p] = Complex{0.0, 0.0};
    const auto corners = static_cast<std::size_t>(1) << n;
    for (std::size_t corner = 0; corner < corners; ++corner) {
        double weight = 1.0;
        std::size_t flat = 0;
        std::size_t sites[8];
        for (int p = 0; p < n; ++p) {
            const bool upper = (corner >> p) & 1u;
            sites[p] = (base[p] + (upper ? 1 : 0)) % m;
            weight *= upper ? frac[p] : 1.0 - frac[p];
            flat = flat * m + sites[p];
        }
        if (weight == 0.0) continue;
        value += weight * amp[flat];
        for (int p = 0; p < n; ++p) {
            const std::size_t stride = grid.stride(p);
            // Unsigned wrap-around arithmetic lands on the right cell.
            const std::size_t up = flat + ((sites[p] + 1) % m - sites[p]) * stride;
            const std::size_t down = flat + ((sites[p] + m - 1) % m - sites[p]) * stride;
            gradient[p] += weight * (amp[up] - amp[down]) / (2.0 * spacing);
        }
    }
    const double density = std::norm(value);
    if (!(density >= 1e-10 * peak)) return false;
    for (int p = 0; p < n; ++p)
        velocity_out[static_cast<std::size_t>(p)] =
            (std::conj(value) * gradient[p]).imag() /
            (density * masses[static_cast<std::size_t>(p)]);
    return true;
}

}  // namespace detail

// Guidance velocity v_k = (1/m_k) Im(psi* d_k psi)/|psi|^2 at Q. Throws a
// NodeError below the node threshold 1e-10 * max |psi|^2.
inline std::vector<double> velocity_field(const WaveFunction& psi,
                                          const ParticleConfiguration& config) {
    const GridSpec& grid = psi.grid();
    if (grid.num_particles > 8) throw UnsupportedArityError("guidance supports up to 8 particles");
    if (config.positions.size() != static_cast<std::size_t>(grid.num_particles))
        throw DomainError("configuration size does not match the particle count");
    double peak = 0.0;
    for (const Complex& a : psi.amplitudes()) peak = std::max(peak, std::norm(a));
    std::vector<double> velocity(static_cast<std::size_t>(grid.num_particles));
    if (!detail::guidance_probe(grid, psi.amplitudes(), peak, config.positions, grid.masses,
                                velocity))
        throw NodeError("velocity evaluated too close to a wavefunction node");
    return velocity;
}

// I.i.d. configurations from the |psi|^2 cell weights: categorical over grid
// cells, then uniform jitter inside the chosen cell. Deterministic per seed.
inline std::vector<ParticleConfiguration> sample_quantum_equilibrium(const WaveFunction& psi,
                                                                     int count,
                                                                     std::uint64_t seed) {
    if (count <= 0) throw DomainError("sample count must be positive");
    const GridSpec& grid = psi.grid();
    std::vector<double> weights(psi.amplitudes().size());
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::norm(psi.amplitudes()[i]);
    const std::vector<double> cdf = cumulative_weights(weights);
    Rng rng(seed);
    const auto m = static_cast<std::size_t>(grid.points_per_axis);
    std::vector<ParticleConfiguration> samples(static_cast<std::size_t>(count));
    for (auto& sample : samples) {
        std::size_t flat = sample_categorical(cdf, rng.uniform());
        sample.positions.resize(static_cast<std::size_t>(grid.num_particles));
        for (int p = grid.num_particles; p-- > 0;) {
            const auto site = static_cast<int>(flat % m);
            flat /= m;
            const double jitter = (rng.uniform() - 0.5) * grid.spacing();
            sample.positions[static_cast<std::size_t>(p)] =
                detail::wrap_position(grid.coord(site) + jitter, grid.box_length);
        }
    }
    return samples;
}

namespace detail {

// psi stored at every step boundary, with per-store density peaks for the
// node threshold. Times record elapsed integration time; direction = -1
// marks a backward run (psi stepped with negative dt), where the velocity
// enters with a flipped sign. Immutable once built, so trajectory
// integration can fan out across threads.
struct GuidanceTimeline {
    GridSpec grid;
    double direction = 1.0;
    std::vector<double> times;
    std::vector<std::vector<Complex>> states;
    std::vector<double> peaks;
};

inline GuidanceTimeline build_timeline(const WaveFunction& psi0, const HamiltonianSpec& ham,
                                       double duration, double dt) {
    if (!(duration >= 0.0)) throw DomainError("run duration must be non-negative");
    if (dt == 0.0) throw DomainError("dt must be nonzero");
    GuidanceTimeline timeline{psi0.grid(), dt > 0.0 ? 1.0 : -1.0, {}, {}, {}};
    std::size_t steps = full_step_count(duration, dt);
    if (steps == 0 && duration > 0.0) steps = 1;
    const double step_span = steps > 0 ? duration / static_cast<double>(steps) : 0.0;
    SplitStepPropagator prop(psi0.grid(), ham);
    WaveFunction psi = psi0;
    auto push = [&](double t) {
        timeline.times.push_back(t);
        timeline.states.push_back(psi.amplitudes());
        double peak = 0.0;
        for (const Complex& a : psi.amplitudes()) peak = std::max(peak, std::norm(a));
        timeline.peaks.push_back(peak);
    };
    push(0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        if (!ham.is_zero()) prop.step(psi, dt > 0.0 ? step_span : -step_span);
        push(step_span * static_cast<double>(i + 1));
    }
    return timeline;
}

// RK4 across one stored interval with the velocity linearly interpolated in
// time between the bounding stores. Near a node the interval is retried with
// quartered substeps, up to four refinements.
inline bool integrate_interval(const GuidanceTimeline& timeline, std::size_t store,
                               std::vector<double>& positions) {
    const auto n = static_cast<std::size_t>(timeline.grid.num_particles);
    const double h_full = timeline.times[store + 1] - timeline.times[store];
    double v0[8], v1[8], k1[8], k2[8], k3[8], k4[8], q[8], trial[8];

    auto velocity = [&](double theta, const double* point, double* out) -> bool {
        if (!guidance_probe(timeline.grid, timeline.states[store], timeline.peaks[store],
                            {point, n}, timeline.grid.masses, {v0, n}))
            return false;
        if (!guidance_probe(timeline.grid, timeline.states[store + 1], timeline.peaks[store + 1],
                            {point, n}, timeline.grid.masses, {v1, n}))
            return false;
        for (std::size_t p = 0; p < n; ++p)
            out[p] = timeline.direction * ((1.0 - theta) * v0[p] + theta * v1[p]);
        return true;
    };

    for (int depth = 0; depth <= 4; ++depth) {
        const int substeps = 1 << (2 * depth);
        const double h = h_full / substeps;
        for (std::size_t p = 0; p < n; ++p) q[p] = positions[p];
        bool node_hit = false;
        for (int sub = 0; sub < substeps && !node_hit; ++sub) {
            const double theta0 = static_cast<double>(sub) / substeps;
            const double theta_mid = (sub + 0.5) / substeps;
            const double theta1 = static_cast<double>(sub + 1) / substeps;
            const double box = timeline.grid.box_length;
            auto shift = [&](const double* from, const double* v, double scale) {
                for (std::size_t p = 0; p < n; ++p)
                    trial[p] = wrap_position(from[p] + scale * v[p], box);
            };
            if (!velocity(theta0, q, k1)) { node_hit = true; break; }
            shift(q, k1, 0.5 * h);
            if (!velocity(theta_mid, trial, k2)) { node_hit = true; break; }
            shift(q, k2, 0.5 * h);
            if (!velocity(theta_mid, trial, k3)) { node_hit = true; break; }
            shift(q, k3, h);
            if (!velocity(theta1, trial, k4)) { node_hit = true; break; }
            for (std::size_t p = 0; p < n; ++p)
                q[p] = wrap_position(q[p] + h / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]),
                                     box);
        }
        if (!node_hit) {
            for (std::size_t p = 0; p < n; ++p) positions[p] = q[p];
            return true;
        }
    }
    return false;
}

// record_times = nullptr records every store; otherwise only the listed
// times (plus t = 0) are kept, which bounds the memory of large ensembles.
inline Trajectory integrate_trajectory(const GuidanceTimeline& timeline,
                                       const ParticleConfiguration& start,
                                       const std::vector<double>* record_times = nullptr) {
    Trajectory trajectory;
    trajectory.times.push_back(timeline.times.front());
    trajectory.configurations.push_back(start);
    std::size_t next_record = 0;
    std::vector<double> positions = start.positions;
    for (std::size_t store = 0; store + 1 < timeline.times.size(); ++store) {
        if (!integrate_interval(timeline, store, positions)) {
            trajectory.status = Trajectory::Status::node_abort;
            return trajectory;
        }
        const double t = timeline.times[store + 1];
        bool record = record_times == nullptr;
        if (record_times != nullptr) {
            while (next_record < record_times->size() &&
                   (*record_times)[next_record] < t - 1e-12)
                ++next_record;
            record = next_record < record_times->size() &&
                     std::abs((*record_times)[next_record] - t) <= 1e-12;
        }
        if (record) {
            trajectory.times.push_back(t);
            trajectory.configurations.push_back(ParticleConfiguration{positions});
        }
    }
    return trajectory;
}

}  // namespace detail

// Deterministic guidance integration under the pure Schrodinger evolution
// (no collapses): psi advances by split steps, Q by RK4 between stores.
// Negative dt integrates the pair backwards.
inline Trajectory run_bohm(const WaveFunction& psi0, const HamiltonianSpec& ham,
                           const ParticleConfiguration& start, double duration, double dt) {
    const GridSpec& grid = psi0.grid();
    if (grid.num_particles > 8) throw UnsupportedArityError("guidance supports up to 8 particles");
    if (start.positions.size() != static_cast<std::size_t>(grid.num_particles))
        throw DomainError("configuration size does not match the particle count");
    const detail::GuidanceTimeline timeline = detail::build_timeline(psi0, ham, duration, dt);
    return detail::integrate_trajectory(timeline, start);
}

// Equilibrium-sampled ensemble sharing one stored psi timeline; trajectories
// are independent and integrate in parallel. A non-empty record_times keeps
// only those sample points per trajectory.
inline std::vector<Trajectory> run_bohm_ensemble(const WaveFunction& psi0,
                                                 const HamiltonianSpec& ham, int count,
                                                 double duration, double dt, std::uint64_t seed,
                                                 int threads = 1,
                                                 const std::vector<double>& record_times = {}) {
    const std::vector<ParticleConfiguration> starts =
        sample_quantum_equilibrium(psi0, count, seed);
    const detail::GuidanceTimeline timeline = detail::build_timeline(psi0, ham, duration, dt);
    std::vector<Trajectory> trajectories(starts.size());
    const std::vector<double>* record = record_times.empty() ? nullptr : &record_times;
    parallel_for(starts.size(), effective_threads(threads), [&](std::size_t i) {
        trajectories[i] = detail::integrate_trajectory(timeline, starts[i], record);
    });
    return trajectories;
}

}  // namespace collapse_lab
