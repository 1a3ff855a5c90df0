#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/fft.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

// Symmetric split-step propagator for the Schrodinger evolution under
// periodic boundaries: half potential phase, spectral kinetic factor per
// axis, half potential phase. Every factor is a pure phase, so each step is
// unitary up to rounding; the splitting error is O(dt^3) per step.
//
// Phase tables depend on dt and are rebuilt when the step size changes.
// Instances are not safe for concurrent use; create one per thread.
class SplitStepPropagator {
public:
    SplitStepPropagator(const GridSpec& grid, const HamiltonianSpec& ham)
        : grid_(grid),
          ham_(ham),
          fft_(static_cast<std::size_t>(grid.points_per_axis)),
          potential_(build_potential_table(grid, ham)),
          line_(static_cast<std::size_t>(grid.points_per_axis)) {
        if (ham_.kinetic) {
            // k^2/(2m) along each axis, in FFT frequency order.
            const int m = grid_.points_per_axis;
            kinetic_.assign(static_cast<std::size_t>(grid_.num_particles),
                            std::vector<double>(static_cast<std::size_t>(m), 0.0));
            constexpr double two_pi = 2.0 * 3.14159265358979323846;
            for (int p = 0; p < grid_.num_particles; ++p) {
                for (int s = 0; s < m; ++s) {
                    const int n = s <= m / 2 ? s : s - m;
                    const double k = two_pi * n / grid_.box_length;
                    kinetic_[static_cast<std::size_t>(p)][static_cast<std::size_t>(s)] =
                        k * k / (2.0 * grid_.masses[static_cast<std::size_t>(p)]);
                }
            }
        }
    }

    const GridSpec& grid() const { return grid_; }

    // Advances psi by dt in place. Negative dt steps backwards.
    void step(WaveFunction& psi, double dt) {
        if (!(psi.grid() == grid_)) throw IncompatibilityError("state grid does not match propagator");
        if (!(std::abs(dt) <= ham_.dt_max) || dt == 0.0)
            throw DomainError("step size must satisfy 0 < |dt| <= dt_max");
        if (ham_.is_zero()) return;
        if (dt != cached_dt_) rebuild_phases(dt);
        auto& amp = psi.amplitudes();
        apply_half_potential(amp);
        if (ham_.kinetic)
            for (int axis = 0; axis < grid_.num_particles; ++axis) apply_kinetic(amp, axis);
        apply_half_potential(amp);
        for (const Complex& a : amp) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw NumericalOverflowError("non-finite amplitudes after a unitary step");
        }
    }

private:
    void rebuild_phases(double dt) {
        cached_dt_ = dt;
        if (!potential_.empty()) {
            half_pot_phase_.resize(potential_.size());
            for (std::size_t i = 0; i < potential_.size(); ++i) {
                const double angle = -0.5 * dt * potential_[i];
                half_pot_phase_[i] = {std::cos(angle), std::sin(angle)};
            }
        }
        if (ham_.kinetic) {
            kin_phase_.assign(kinetic_.size(), {});
            for (std::size_t p = 0; p < kinetic_.size(); ++p) {
                kin_phase_[p].resize(kinetic_[p].size());
                for (std::size_t s = 0; s < kinetic_[p].size(); ++s) {
                    const double angle = -dt * kinetic_[p][s];
                    kin_phase_[p][s] = {std::cos(angle), std::sin(angle)};
                }
            }
        }
    }

    void apply_half_potential(std::vector<Complex>& amp) {
        if (potential_.empty()) return;
        for (std::size_t i = 0; i < amp.size(); ++i) amp[i] *= half_pot_phase_[i];
    }

    // Forward FFT along one axis, kinetic phase, inverse FFT. Kinetic factors
    // of different axes commute, so axes are handled sequentially.
    void apply_kinetic(std::vector<Complex>& amp, int axis) {
        const auto m = static_cast<std::size_t>(grid_.points_per_axis);
        const std::size_t stride = grid_.stride(axis);
        const std::size_t lines = amp.size() / m;
        const auto& phase = kin_phase_[static_cast<std::size_t>(axis)];
        for (std::size_t line = 0; line < lines; ++line) {
            // Base offset of this line: split the flat index around the axis.
            const std::size_t outer = line / stride;
            const std::size_t inner = line % stride;
            const std::size_t base = outer * stride * m + inner;
            for (std::size_t s = 0; s < m; ++s) line_[s] = amp[base + s * stride];
            fft_.forward(line_.data());
            for (std::size_t s = 0; s < m; ++s) line_[s] *= phase[s];
            fft_.inverse(line_.data());
            for (std::size_t s = 0; s < m; ++s) amp[base + s * stride] = line_[s];
        }
    }

    GridSpec grid_;
    HamiltonianSpec ham_;
    Fft fft_;
    std::vector<double> potential_;
    std::vector<std::vector<double>> kinetic_;
    double cached_dt_ = 0.0;
    std::vector<Complex> half_pot_phase_;
    std::vector<std::vector<Complex>> kin_phase_;
    std::vector<Complex> line_;
};

inline WaveFunction step_unitary(const WaveFunction& psi, const HamiltonianSpec& ham, double dt) {
    SplitStepPropagator prop(psi.grid(), ham);
    WaveFunction out = psi;
    prop.step(out, dt);
    return out;
}

// Number of full steps of |dt| in T, treating near-integer ratios as exact.
inline std::size_t full_step_count(double duration, double dt) {
    return static_cast<std::size_t>(std::floor(duration / std::abs(dt) + 1e-9));
}

// Composition of split steps covering T >= 0; the last step is truncated when
// dt does not divide T. Deterministic, no randomness involved.
inline WaveFunction evolve(const WaveFunction& psi, const HamiltonianSpec& ham, double duration,
                           double dt) {
    if (!(duration >= 0.0)) throw DomainError("evolution time must be non-negative");
    if (dt == 0.0) throw DomainError("dt must be nonzero");
    WaveFunction out = psi;
    if (duration == 0.0 || ham.is_zero()) return out;
    SplitStepPropagator prop(psi.grid(), ham);
    const std::size_t steps = full_step_count(duration, dt);
    std::size_t index = 0;
    try {
        for (; index < steps; ++index) prop.step(out, dt);
        const double remainder = duration - static_cast<double>(steps) * std::abs(dt);
        if (remainder > 1e-9 * std::max(duration, 1.0))
            prop.step(out, dt > 0.0 ? remainder : -remainder);
    } catch (const NumericalOverflowError& e) {
        throw NumericalOverflowError(std::string(e.what()) + " at step " + std::to_string(index));
    }
    return out;
}

}  // namespace collapse_lab
