#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/split_step.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

enum class CollapseKernel { gaussian, compact_support };

// Jump-process parameters: per-particle collapse rate, inverse squared width
// of the localization kernel, and the kernel family.
struct GrwParams {
    double lambda_rate = 0.5;
    double alpha = 4.0;
    CollapseKernel kernel = CollapseKernel::gaussian;
    double compact_half_width = 1.0;  // only read for the compact kernel
};

inline void validate_grw_params(const GrwParams& params, const GridSpec& grid) {
    if (!(params.lambda_rate > 0.0)) throw DomainError("collapse rate lambda must be positive");
    if (!(params.alpha > 0.0)) throw DomainError("kernel alpha must be positive");
    if (params.kernel == CollapseKernel::compact_support) {
        const double w = params.compact_half_width;
        if (!(w >= 2.0 * grid.spacing() && w <= grid.box_length / 4.0))
            throw DomainError("compact kernel half-width must lie in [2 spacing, L/4]");
    }
}

// Localization kernel amplitude kappa(u) at displacement u from the collapse
// center, with the distance taken plain (not wrapped around the box).
// The normalization constant is fixed by the lattice analogue of the rule
// that the squared kernel integrates to one, which forces the center-sampling
// density to sum to one on the grid. For the Gaussian at resolvable widths
// the constant agrees with (2 alpha/pi)^(1/4) to rounding.
class KernelShape {
public:
    KernelShape(const GrwParams& params, double spacing) : params_(params) {
        double sum = 0.0;
        if (params_.kernel == CollapseKernel::gaussian) {
            // Lattice sum of exp(-2 alpha u^2); terms truncated once negligible.
            sum = 1.0;
            for (int k = 1;; ++k) {
                const double term = std::exp(-2.0 * params_.alpha * k * k * spacing * spacing);
                sum += 2.0 * term;
                if (term < 1e-300 || k > 100000000) break;
            }
        } else {
            const double w = params_.compact_half_width;
            const int reach = static_cast<int>(std::floor(w / spacing));
            constexpr double half_pi = 0.5 * 3.14159265358979323846;
            for (int k = -reach; k <= reach; ++k) {
                if (std::abs(k * spacing) >= w) continue;
                const double c = std::cos(half_pi * k * spacing / w);
                sum += std::pow(c, 4.0);
            }
        }
        norm_ = 1.0 / std::sqrt(sum * spacing);
    }

    double operator()(double u) const {
        if (params_.kernel == CollapseKernel::gaussian)
            return norm_ * std::exp(-params_.alpha * u * u);
        const double w = params_.compact_half_width;
        if (std::abs(u) >= w) return 0.0;
        constexpr double half_pi = 0.5 * 3.14159265358979323846;
        const double c = std::cos(half_pi * u / w);
        return norm_ * c * c;
    }

    double normalization() const { return norm_; }

private:
    GrwParams params_;
    double norm_;
};

// Probability density of the collapse center over the M candidate sites:
// p(x) = ||L_x psi||^2, i.e. the particle marginal convolved with the squared
// kernel. Sums to one under the spacing weight by the kernel normalization.
inline std::vector<double> collapse_center_density(const WaveFunction& psi, int particle,
                                                   const GrwParams& params) {
    const GridSpec& grid = psi.grid();
    validate_grw_params(params, grid);
    const std::vector<double> marginal = marginal_density(psi, particle);
    const KernelShape kernel(params, grid.spacing());
    const int m = grid.points_per_axis;
    // Squared kernel sampled at lattice displacements.
    std::vector<double> k2(static_cast<std::size_t>(m), 0.0);
    for (int d = 0; d < m; ++d) {
        const double k = kernel(d * grid.spacing());
        k2[static_cast<std::size_t>(d)] = k * k;
    }
    std::vector<double> density(static_cast<std::size_t>(m), 0.0);
    for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int q = 0; q < m; ++q) {
            const double w = k2[static_cast<std::size_t>(std::abs(q - x))];
            if (w > 0.0) acc += w * marginal[static_cast<std::size_t>(q)];
        }
        density[static_cast<std::size_t>(x)] = acc * grid.spacing();
    }
    return density;
}

// psi -> L_x psi / ||L_x psi||: multiplies along the hit particle's
// coordinate by the kernel centered at x, then renormalizes.
inline WaveFunction apply_collapse(const WaveFunction& psi, int particle, double center,
                                   const GrwParams& params) {
    const GridSpec& grid = psi.grid();
    validate_grw_params(params, grid);
    if (particle < 0 || particle >= grid.num_particles)
        throw DomainError("particle label out of range");
    const KernelShape kernel(params, grid.spacing());
    const auto m = static_cast<std::size_t>(grid.points_per_axis);
    std::vector<double> factor(m);
    for (std::size_t k = 0; k < m; ++k)
        factor[k] = kernel(grid.coord(static_cast<int>(k)) - center);
    const std::size_t stride = grid.stride(particle);
    std::vector<Complex> amp = psi.amplitudes();
    for (std::size_t flat = 0; flat < amp.size(); ++flat)
        amp[flat] *= factor[(flat / stride) % m];
    WaveFunction out(psi.grid(), std::move(amp));
    const double weight = out.norm();
    if (!(weight > 1e-12))
        throw ZeroWeightError("collapse center has vanishing overlap with the state");
    out.normalize();
    return out;
}

// One GRW hit: time, hit particle, collapse center. Doubles as a flash.
// Branch weights before/after the hit are filled when the run is given a
// region partition.
struct CollapseEvent {
    double time = 0.0;
    int particle = 0;
    double center = 0.0;
    std::vector<double> pre_weights;
    std::vector<double> post_weights;
};

struct GrwRunOptions {
    std::vector<double> snapshot_times;            // sorted, within [0, T]
    std::vector<double> probe_times;               // sorted, within [0, T]
    std::pair<int, int> probe_sites{-1, -1};       // grid sites; N = 1 only
    const RegionPartition* partition = nullptr;    // enables event weight records
    std::uint64_t event_cap = 1'000'000;
};

struct GrwRunResult {
    WaveFunction final_state;
    std::vector<CollapseEvent> events;
    std::vector<std::pair<double, MatterDensityField>> snapshots;
    // Probe records: psi(qL) conj(psi(qR)) and the two densities, per probe time.
    std::vector<Complex> probe_products;
    std::vector<double> probe_left_density;
    std::vector<double> probe_right_density;
    std::vector<std::string> warnings;
};

namespace detail {

// Fixed-dt stepping from t_from to t_to with the last step truncated to fit.
inline void advance_unitary(SplitStepPropagator* prop, WaveFunction& psi, double t_from,
                            double t_to, double dt) {
    if (prop == nullptr) return;  // H = 0
    const double span = t_to - t_from;
    if (span <= 0.0) return;
    const std::size_t steps = full_step_count(span, dt);
    for (std::size_t i = 0; i < steps; ++i) prop->step(psi, dt);
    const double remainder = span - static_cast<double>(steps) * dt;
    if (remainder > 1e-9 * std::max(span, 1.0)) prop->step(psi, remainder);
}

}  // namespace detail

// The GRW jump process: exponential waiting times with state-independent
// total rate N*lambda, uniformly random hit label, collapse center drawn
// from ||L_x psi||^2, unitary evolution between hits. Bit-reproducible for a
// fixed seed.
inline GrwRunResult run_grw(const WaveFunction& psi0, const HamiltonianSpec& ham,
                            const GrwParams& params, double duration, double dt,
                            std::uint64_t seed, const GrwRunOptions& options = {}) {
    const GridSpec& grid = psi0.grid();
    validate_grw_params(params, grid);
    if (!(duration >= 0.0)) throw DomainError("run duration must be non-negative");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    GrwRunResult result{psi0, {}, {}, {}, {}, {}, {}};
    if (boundary_mass(psi0) > 1e-6)
        result.warnings.push_back("initial state carries boundary mass above 1e-6");

    Rng rng(seed);
    const double total_rate = grid.num_particles * params.lambda_rate;
    SplitStepPropagator prop_storage(grid, ham);
    SplitStepPropagator* prop = ham.is_zero() ? nullptr : &prop_storage;

    const bool with_weights = options.partition != nullptr && options.partition->size() > 0;
    const bool with_probes = options.probe_sites.first >= 0 && !options.probe_times.empty();
    if (with_probes && grid.num_particles != 1)
        throw UnsupportedArityError("probe records are defined for single-particle runs");
    if (with_probes && (options.probe_sites.first >= grid.points_per_axis ||
                        options.probe_sites.second < 0 ||
                        options.probe_sites.second >= grid.points_per_axis))
        throw DomainError("probe sites out of range");

    auto record_probe = [&](const WaveFunction& psi) {
        const auto& amp = psi.amplitudes();
        const Complex left = amp[static_cast<std::size_t>(options.probe_sites.first)];
        const Complex right = amp[static_cast<std::size_t>(options.probe_sites.second)];
        result.probe_products.push_back(left * std::conj(right));
        result.probe_left_density.push_back(std::norm(left));
        result.probe_right_density.push_back(std::norm(right));
    };

    std::size_t next_snapshot = 0;
    std::size_t next_probe = 0;
    auto flush_marks = [&](double now, const WaveFunction& psi) {
        while (next_snapshot < options.snapshot_times.size() &&
               options.snapshot_times[next_snapshot] <= now + 1e-12) {
            result.snapshots.emplace_back(options.snapshot_times[next_snapshot],
                                          matter_density(psi));
            ++next_snapshot;
        }
        while (with_probes && next_probe < options.probe_times.size() &&
               options.probe_times[next_probe] <= now + 1e-12) {
            record_probe(psi);
            ++next_probe;
        }
    };

    double now = 0.0;
    flush_marks(0.0, result.final_state);
    double next_event = rng.exponential(total_rate);
    while (now < duration - 1e-12) {
        double stop = duration;
        if (next_event < stop) stop = next_event;
        if (next_snapshot < options.snapshot_times.size())
            stop = std::min(stop, options.snapshot_times[next_snapshot]);
        if (with_probes && next_probe < options.probe_times.size())
            stop = std::min(stop, options.probe_times[next_probe]);
        detail::advance_unitary(prop, result.final_state, now, stop, dt);
        now = stop;
        flush_marks(now, result.final_state);
        if (now >= next_event - 1e-15 && next_event <= duration) {
            if (result.events.size() >= options.event_cap)
                throw ClockOverrunError("collapse count exceeded the event cap");
            CollapseEvent event;
            event.time = next_event;
            event.particle = rng.uniform_int(grid.num_particles);
            const std::vector<double> density =
                collapse_center_density(result.final_state, event.particle, params);
            const std::vector<double> cdf = cumulative_weights(density);
            const int site = static_cast<int>(sample_categorical(cdf, rng.uniform()));
            event.center = grid.coord(site);
            if (with_weights)
                event.pre_weights =
                    branch_weights(matter_density(result.final_state), *options.partition);
            result.final_state =
                apply_collapse(result.final_state, event.particle, event.center, params);
            if (with_weights)
                event.post_weights =
                    branch_weights(matter_density(result.final_state), *options.partition);
            result.events.push_back(std::move(event));
            next_event += rng.exponential(total_rate);
        }
    }
    if (boundary_mass(result.final_state) > 1e-6)
        result.warnings.push_back("final state carries boundary mass above 1e-6");
    return result;
}

}  // namespace collapse_lab
