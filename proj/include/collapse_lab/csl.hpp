#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
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

// Continuous localization parameters for the single-particle integrator.
// gamma is normalized so that the coherence between two well-separated
// points decays at rate gamma; smearing_alpha reuses the Gaussian kernel
// shape of the jump process; the smearing operators sit on every
// smearing_stride-th grid site.
struct CslParams {
    double gamma = 1.0;
    double smearing_alpha = 4.0;
    double dt_sde = 1e-4;
    int smearing_stride = 4;
};

inline void validate_csl_params(const CslParams& params, const GridSpec& grid) {
    if (grid.num_particles != 1)
        throw UnsupportedArityError("the CSL integrator is implemented for one particle");
    if (params.gamma < 0.0) throw DomainError("CSL coupling gamma must be non-negative");
    if (!(params.dt_sde > 0.0)) throw DomainError("dt_sde must be positive");
    if (params.gamma > 0.0 && params.dt_sde > 1e-3 / params.gamma)
        throw DomainError("dt_sde must satisfy dt_sde <= 1e-3 / gamma");
    if (params.smearing_stride < 1 || params.smearing_stride >= grid.points_per_axis)
        throw DomainError("smearing stride out of range");
}

// Tables for the diagonal smeared-position family A_s and the per-site
// coupling. With a_s(q) = exp(-alpha (q - c_s)^2) and coupling
// g = gamma * stride * spacing * sqrt(2 alpha / pi), the decoherence rate
// g/2 * sum_s (a_s(q) - a_s(q'))^2 approaches gamma for |q - q'| >> width.
class SmearingFamily {
public:
    SmearingFamily(const GridSpec& grid, const CslParams& params) {
        validate_csl_params(params, grid);
        const int m = grid.points_per_axis;
        for (int site = 0; site < m; site += params.smearing_stride) centers_.push_back(site);
        values_.assign(centers_.size(), std::vector<double>(static_cast<std::size_t>(m)));
        for (std::size_t s = 0; s < centers_.size(); ++s) {
            const double c = grid.coord(centers_[s]);
            for (int k = 0; k < m; ++k) {
                const double u = grid.coord(k) - c;
                values_[s][static_cast<std::size_t>(k)] =
                    std::exp(-params.smearing_alpha * u * u);
            }
        }
        coupling_ = params.gamma * params.smearing_stride * grid.spacing() *
                    std::sqrt(2.0 * params.smearing_alpha / 3.14159265358979323846);
    }

    std::size_t site_count() const { return centers_.size(); }
    double coupling() const { return coupling_; }
    const std::vector<double>& values(std::size_t s) const { return values_[s]; }

private:
    std::vector<int> centers_;
    std::vector<std::vector<double>> values_;
    double coupling_ = 0.0;
};

namespace detail {

// Stochastic half of one Euler-Maruyama step; the operators are diagonal so
// the update is a per-cell multiplier, followed by explicit renormalization.
inline void csl_noise_update(WaveFunction& psi, const SmearingFamily& family, double dt,
                             std::span<const double> noise) {
    if (noise.size() != family.site_count())
        throw DomainError("need one noise draw per smearing site");
    const double g = family.coupling();
    if (g == 0.0) return;
    auto& amp = psi.amplitudes();
    const std::size_t m = amp.size();
    const double sqrt_g_dt = std::sqrt(g * dt);
    // Expectations <A_s>.
    std::vector<double> density(m);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        density[k] = std::norm(amp[k]);
        norm2 += density[k];
    }
    std::vector<double> expectation(family.site_count(), 0.0);
    for (std::size_t s = 0; s < family.site_count(); ++s) {
        const auto& a = family.values(s);
        double acc = 0.0;
        for (std::size_t k = 0; k < m; ++k) acc += a[k] * density[k];
        expectation[s] = acc / norm2;
    }
    // Multiplier 1 + sum_s [sqrt(g dt) xi_s dA - (g dt / 2) dA^2], dA = a_s - <A_s>.
    std::vector<double> multiplier(m, 1.0);
    for (std::size_t s = 0; s < family.site_count(); ++s) {
        const auto& a = family.values(s);
        const double e = expectation[s];
        const double xi = sqrt_g_dt * noise[s];
        const double half_g_dt = 0.5 * g * dt;
        for (std::size_t k = 0; k < m; ++k) {
            const double da = a[k] - e;
            multiplier[k] += xi * da - half_g_dt * da * da;
        }
    }
    for (std::size_t k = 0; k < m; ++k) amp[k] *= multiplier[k];
    for (const Complex& a : amp)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw NumericalOverflowError("non-finite amplitudes after a CSL step");
    psi.normalize();
}

}  // namespace detail

// One step of the norm-preserved unraveling
// dpsi = [-iH dt + sqrt(g)(A - <A>) dW - (g/2)(A - <A>)^2 dt] psi:
// a unitary split step for the Hamiltonian part, then the Euler-Maruyama
// noise update with explicit renormalization. gamma = 0 reduces exactly to
// the unitary step.
inline WaveFunction csl_step(const WaveFunction& psi, const HamiltonianSpec& ham,
                             const CslParams& params, std::span<const double> noise) {
    const SmearingFamily family(psi.grid(), params);
    WaveFunction out = psi;
    if (!ham.is_zero()) {
        SplitStepPropagator prop(psi.grid(), ham);
        prop.step(out, params.dt_sde);
    }
    detail::csl_noise_update(out, family, params.dt_sde, noise);
    return out;
}

struct CslRunOptions {
    int output_points = 51;                      // weight-trace sample count, t = 0 inclusive
    const RegionPartition* partition = nullptr;  // regions for the weight trace
    bool record_step_jumps = false;              // per-step max region-weight jumps
};

struct CslRunResult {
    WaveFunction final_state;
    std::vector<double> times;
    std::vector<std::vector<double>> weights;  // [output index][region]
    std::vector<double> step_jumps;            // filled when record_step_jumps
    std::vector<std::string> warnings;
};

// Seeded composition of csl_step over [0, T], recording per-region weights
// at evenly spaced output times. Deterministic given the seed.
inline CslRunResult run_csl(const WaveFunction& psi0, const HamiltonianSpec& ham,
                            const CslParams& params, double duration, std::uint64_t seed,
                            const CslRunOptions& options = {}) {
    const GridSpec& grid = psi0.grid();
    validate_csl_params(params, grid);
    if (!(duration >= 0.0)) throw DomainError("run duration must be non-negative");
    if (options.output_points < 1) throw DomainError("need at least one output point");

    const SmearingFamily family(grid, params);
    SplitStepPropagator prop_storage(grid, ham);
    SplitStepPropagator* prop = ham.is_zero() ? nullptr : &prop_storage;
    Rng rng(seed);

    CslRunResult result{psi0, {}, {}, {}, {}};
    if (boundary_mass(psi0) > 1e-6)
        result.warnings.push_back("initial state carries boundary mass above 1e-6");

    const RegionPartition* partition = options.partition;
    auto current_weights = [&]() -> std::vector<double> {
        if (partition == nullptr || partition->size() == 0) return {};
        return branch_weights(matter_density(result.final_state), *partition);
    };
    auto record_output = [&](double t) {
        result.times.push_back(t);
        result.weights.push_back(current_weights());
    };

    record_output(0.0);
    if (duration == 0.0) return result;

    const std::size_t steps = std::max<std::size_t>(1, full_step_count(duration, params.dt_sde));
    const double dt = duration / static_cast<double>(steps);
    std::vector<double> noise(family.site_count());
    std::vector<double> last_weights = current_weights();
    std::size_t next_output = 1;
    const int outputs = options.output_points;
    for (std::size_t step = 1; step <= steps; ++step) {
        if (prop != nullptr) prop->step(result.final_state, dt);
        for (double& xi : noise) xi = rng.normal();
        detail::csl_noise_update(result.final_state, family, dt, noise);
        if (options.record_step_jumps && partition != nullptr) {
            const std::vector<double> w = current_weights();
            double jump = 0.0;
            for (std::size_t r = 0; r < w.size(); ++r)
                jump = std::max(jump, std::abs(w[r] - last_weights[r]));
            result.step_jumps.push_back(jump);
            last_weights = w;
        }
        const double t = duration * static_cast<double>(step) / static_cast<double>(steps);
        while (next_output < static_cast<std::size_t>(outputs) &&
               t + 1e-12 >= duration * static_cast<double>(next_output) /
                                 static_cast<double>(outputs - 1)) {
            record_output(duration * static_cast<double>(next_output) /
                          static_cast<double>(outputs - 1));
            ++next_output;
        }
    }
    if (boundary_mass(result.final_state) > 1e-6)
        result.warnings.push_back("final state carries boundary mass above 1e-6");
    return result;
}

}  // namespace collapse_lab
