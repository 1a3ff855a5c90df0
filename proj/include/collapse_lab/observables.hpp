#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "collapse_lab/fft.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

inline double position_expectation(const WaveFunction& psi, int particle) {
    const GridSpec& grid = psi.grid();
    const std::vector<double> density = marginal_density(psi, particle);
    double mean = 0.0;
    for (int k = 0; k < grid.points_per_axis; ++k)
        mean += grid.coord(k) * density[static_cast<std::size_t>(k)];
    return mean * grid.spacing();
}

inline double position_variance(const WaveFunction& psi, int particle) {
    const GridSpec& grid = psi.grid();
    const std::vector<double> density = marginal_density(psi, particle);
    double mean = 0.0, second = 0.0;
    for (int k = 0; k < grid.points_per_axis; ++k) {
        const double q = grid.coord(k);
        const double w = density[static_cast<std::size_t>(k)] * grid.spacing();
        mean += q * w;
        second += q * q * w;
    }
    return second - mean * mean;
}

// <H> via the spectral kinetic term and the potential table.
inline double energy_expectation(const WaveFunction& psi, const HamiltonianSpec& ham) {
    const GridSpec& grid = psi.grid();
    double energy = 0.0;
    const std::vector<double> potential = build_potential_table(grid, ham);
    if (!potential.empty()) {
        double v = 0.0;
        const auto& amp = psi.amplitudes();
        for (std::size_t i = 0; i < amp.size(); ++i) v += potential[i] * std::norm(amp[i]);
        energy += v * grid.cell_measure();
    }
    if (ham.kinetic) {
        const auto m = static_cast<std::size_t>(grid.points_per_axis);
        Fft fft(m);
        std::vector<Complex> line(m);
        constexpr double two_pi = 2.0 * 3.14159265358979323846;
        for (int axis = 0; axis < grid.num_particles; ++axis) {
            const std::size_t stride = grid.stride(axis);
            const std::size_t lines = psi.amplitudes().size() / m;
            double kin = 0.0;
            for (std::size_t l = 0; l < lines; ++l) {
                const std::size_t base = (l / stride) * stride * m + (l % stride);
                for (std::size_t s = 0; s < m; ++s) line[s] = psi.amplitudes()[base + s * stride];
                fft.forward(line.data());
                for (std::size_t s = 0; s < m; ++s) {
                    const int n = static_cast<int>(s) <= grid.points_per_axis / 2
                                      ? static_cast<int>(s)
                                      : static_cast<int>(s) - grid.points_per_axis;
                    const double k = two_pi * n / grid.box_length;
                    kin += k * k / (2.0 * grid.masses[static_cast<std::size_t>(axis)]) *
                           std::norm(line[s]);
                }
            }
            // Forward FFT scales the 2-norm by M; undo it in the quadrature.
            energy += kin * grid.cell_measure() / static_cast<double>(m);
        }
    }
    return energy;
}

}  // namespace collapse_lab
