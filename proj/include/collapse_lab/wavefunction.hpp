#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"

namespace collapse_lab {

using Complex = std::complex<double>;

// Complex amplitudes over the M^N configuration-space lattice. The squared
// norm uses the plain Riemann rule sum |psi|^2 * spacing^N. Constructors
// return unit-norm states; propagators mutate private copies through the
// non-const amplitude accessor.
class WaveFunction {
public:
    WaveFunction(GridSpec grid, std::vector<Complex> amplitudes)
        : grid_(std::move(grid)), amp_(std::move(amplitudes)) {
        if (amp_.size() != grid_.cells())
            throw IncompatibilityError("amplitude array does not match the grid");
    }

    const GridSpec& grid() const { return grid_; }
    const std::vector<Complex>& amplitudes() const { return amp_; }
    std::vector<Complex>& amplitudes() { return amp_; }

    double norm_squared() const {
        double sum = 0.0;
        for (const Complex& a : amp_) sum += std::norm(a);
        return sum * grid_.cell_measure();
    }

    double norm() const { return std::sqrt(norm_squared()); }

    // Divides by the current norm; degenerate below the overlap threshold.
    void normalize() {
        const double n = norm();
        if (!(n > 1e-12)) throw DegenerateInputError("cannot normalize a (near-)zero state");
        const double inv = 1.0 / n;
        for (Complex& a : amp_) a *= inv;
    }

    Complex at(std::span<const int> sites) const {
        if (sites.size() != static_cast<std::size_t>(grid_.num_particles))
            throw DomainError("need one site index per particle");
        std::size_t flat = 0;
        for (int p = 0; p < grid_.num_particles; ++p) {
            if (sites[p] < 0 || sites[p] >= grid_.points_per_axis)
                throw DomainError("site index out of range");
            flat = flat * static_cast<std::size_t>(grid_.points_per_axis) +
                   static_cast<std::size_t>(sites[p]);
        }
        return amp_[flat];
    }

private:
    GridSpec grid_;
    std::vector<Complex> amp_;
};

inline Complex inner_product(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid() == b.grid())) throw IncompatibilityError("inner product across different grids");
    Complex sum = 0.0;
    const auto& x = a.amplitudes();
    const auto& y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::conj(x[i]) * y[i];
    return sum * a.grid().cell_measure();
}

inline double l2_distance(const WaveFunction& a, const WaveFunction& b) {
    if (!(a.grid() == b.grid())) throw IncompatibilityError("distance across different grids");
    double sum = 0.0;
    const auto& x = a.amplitudes();
    const auto& y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) sum += std::norm(x[i] - y[i]);
    return std::sqrt(sum * a.grid().cell_measure());
}

// Normalized product of 1-D Gaussian packets
// exp(-(q-c)^2/(4 sigma^2) + i p q) per particle.
inline WaveFunction gaussian_packet(const GridSpec& grid, std::span<const double> centers,
                                    std::span<const double> widths,
                                    std::span<const double> momenta) {
    const auto n = static_cast<std::size_t>(grid.num_particles);
    if (centers.size() != n || widths.size() != n || momenta.size() != n)
        throw DomainError("need one center, width and momentum per particle");
    for (std::size_t p = 0; p < n; ++p) {
        if (!grid.contains(centers[p]))
            throw DomainError("packet center outside the box");
        if (!(widths[p] >= 2.0 * grid.spacing()))
            throw ResolutionError("packet width below two grid spacings");
    }
    // Per-axis 1-D factors, combined as an outer product.
    const int m = grid.points_per_axis;
    std::vector<std::vector<Complex>> factors(n, std::vector<Complex>(static_cast<std::size_t>(m)));
    for (std::size_t p = 0; p < n; ++p) {
        for (int k = 0; k < m; ++k) {
            const double q = grid.coord(k);
            const double dq = q - centers[p];
            const double envelope = std::exp(-dq * dq / (4.0 * widths[p] * widths[p]));
            const double phase = momenta[p] * q;
            factors[p][static_cast<std::size_t>(k)] =
                envelope * Complex{std::cos(phase), std::sin(phase)};
        }
    }
    std::vector<Complex> amp(grid.cells());
    for (std::size_t flat = 0; flat < amp.size(); ++flat) {
        Complex v = 1.0;
        std::size_t rem = flat;
        for (std::size_t p = n; p-- > 0;) {
            const int k = static_cast<int>(rem % static_cast<std::size_t>(m));
            rem /= static_cast<std::size_t>(m);
            v *= factors[p][static_cast<std::size_t>(k)];
        }
        amp[flat] = v;
    }
    WaveFunction psi(grid, std::move(amp));
    psi.normalize();
    return psi;
}

inline WaveFunction gaussian_packet(const GridSpec& grid, std::span<const double> centers,
                                    std::span<const double> widths) {
    const std::vector<double> zeros(static_cast<std::size_t>(grid.num_particles), 0.0);
    return gaussian_packet(grid, centers, widths, zeros);
}

// Normalized linear combination of states on one grid.
inline WaveFunction superpose(const std::vector<std::pair<Complex, WaveFunction>>& branches) {
    if (branches.empty()) throw DegenerateInputError("superpose needs at least one branch");
    const GridSpec& grid = branches.front().second.grid();
    double coeff_mass = 0.0;
    for (const auto& [c, state] : branches) {
        if (!(state.grid() == grid)) throw IncompatibilityError("superpose across different grids");
        coeff_mass += std::norm(c);
    }
    if (!(coeff_mass > 0.0)) throw DegenerateInputError("superpose with all-zero coefficients");
    std::vector<Complex> amp(grid.cells(), Complex{0.0, 0.0});
    for (const auto& [c, state] : branches) {
        const auto& src = state.amplitudes();
        for (std::size_t i = 0; i < amp.size(); ++i) amp[i] += c * src[i];
    }
    WaveFunction psi(grid, std::move(amp));
    psi.normalize();
    return psi;
}

// Marginal |psi|^2 of one particle: all other coordinates integrated out with
// weight spacing^(N-1); sum density * spacing = 1 for unit states.
inline std::vector<double> marginal_density(const WaveFunction& psi, int particle) {
    const GridSpec& grid = psi.grid();
    if (particle < 0 || particle >= grid.num_particles)
        throw DomainError("particle label out of range");
    const int m = grid.points_per_axis;
    std::vector<double> density(static_cast<std::size_t>(m), 0.0);
    const std::size_t stride = grid.stride(particle);
    const auto& amp = psi.amplitudes();
    for (std::size_t flat = 0; flat < amp.size(); ++flat) {
        const auto k = static_cast<std::size_t>(
            (flat / stride) % static_cast<std::size_t>(m));
        density[k] += std::norm(amp[flat]);
    }
    double weight = 1.0;
    for (int axis = 1; axis < grid.num_particles; ++axis) weight *= grid.spacing();
    for (double& d : density) d *= weight;
    return density;
}

// Exchanges the coordinates of particles i and j; a unitary involution.
inline WaveFunction swap_labels(const WaveFunction& psi, int i, int j) {
    const GridSpec& grid = psi.grid();
    if (i < 0 || i >= grid.num_particles || j < 0 || j >= grid.num_particles || i == j)
        throw DomainError("swap_labels needs two distinct valid labels");
    const auto m = static_cast<std::size_t>(grid.points_per_axis);
    const std::size_t si = grid.stride(i);
    const std::size_t sj = grid.stride(j);
    const auto& src = psi.amplitudes();
    std::vector<Complex> amp(src.size());
    for (std::size_t flat = 0; flat < src.size(); ++flat) {
        const std::size_t ki = (flat / si) % m;
        const std::size_t kj = (flat / sj) % m;
        const std::size_t swapped = flat + (kj - ki) * si + (ki - kj) * sj;
        amp[swapped] = src[flat];
    }
    return WaveFunction(grid, std::move(amp));
}

// Marginal mass sitting on the outermost sites of each axis; used for the
// soft boundary-occupation warnings.
inline double boundary_mass(const WaveFunction& psi) {
    const GridSpec& grid = psi.grid();
    double total = 0.0;
    for (int p = 0; p < grid.num_particles; ++p) {
        const std::vector<double> density = marginal_density(psi, p);
        total += (density.front() + density.back()) * grid.spacing();
    }
    return total;
}

}  // namespace collapse_lab
