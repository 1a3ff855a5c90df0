#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"

namespace collapse_lab {

// Geometry of the discretized configuration space: N particles on a periodic
// 1-D box of length L sampled at M points per axis, plus per-particle masses.
// Units are dimensionless with hbar = 1. Site k of any axis sits at
// q = -L/2 + k*spacing, and the joint grid holds M^N cells.
struct GridSpec {
    static constexpr std::size_t kDefaultMaxCells = std::size_t{1} << 24;

    int num_particles = 1;
    int points_per_axis = 256;
    double box_length = 20.0;
    std::vector<double> masses;
    std::size_t max_cells = kDefaultMaxCells;

    GridSpec(int n, int m, double length, std::vector<double> particle_masses,
             std::size_t cell_cap = kDefaultMaxCells)
        : num_particles(n),
          points_per_axis(m),
          box_length(length),
          masses(std::move(particle_masses)),
          max_cells(cell_cap) {
        if (num_particles < 1) throw DomainError("need at least one particle");
        if (points_per_axis < 2 || (points_per_axis & (points_per_axis - 1)) != 0)
            throw DomainError("points_per_axis must be a power of two >= 2");
        if (!(box_length > 0.0) || !std::isfinite(box_length))
            throw DomainError("box_length must be positive and finite");
        if (masses.empty()) masses.assign(static_cast<std::size_t>(num_particles), 1.0);
        if (masses.size() == 1 && num_particles > 1)
            masses.assign(static_cast<std::size_t>(num_particles), masses[0]);
        if (masses.size() != static_cast<std::size_t>(num_particles))
            throw DomainError("masses must list one value per particle");
        for (double mass : masses)
            if (!(mass > 0.0) || !std::isfinite(mass))
                throw DomainError("masses must be strictly positive");
        // M^N with overflow guard against the configured cell cap.
        std::size_t total = 1;
        for (int axis = 0; axis < num_particles; ++axis) {
            if (total > max_cells / static_cast<std::size_t>(points_per_axis))
                throw GridCapacityError("grid of " + std::to_string(points_per_axis) + "^" +
                                        std::to_string(num_particles) +
                                        " cells exceeds the cell cap " + std::to_string(max_cells));
            total *= static_cast<std::size_t>(points_per_axis);
        }
        cells_ = total;
    }

    double spacing() const { return box_length / points_per_axis; }
    std::size_t cells() const { return cells_; }

    // Riemann quadrature weight, spacing^N.
    double cell_measure() const {
        double w = 1.0;
        for (int i = 0; i < num_particles; ++i) w *= spacing();
        return w;
    }

    double coord(int site) const { return -0.5 * box_length + site * spacing(); }

    double total_mass() const {
        double sum = 0.0;
        for (double mass : masses) sum += mass;
        return sum;
    }

    // Flat-index stride of one axis; axis 0 varies slowest.
    std::size_t stride(int particle) const {
        std::size_t s = 1;
        for (int axis = particle + 1; axis < num_particles; ++axis)
            s *= static_cast<std::size_t>(points_per_axis);
        return s;
    }

    // Nearest grid site to a coordinate, clamped into [0, M).
    int nearest_site(double q) const {
        const int k = static_cast<int>(std::lround((q + 0.5 * box_length) / spacing()));
        if (k < 0) return 0;
        if (k >= points_per_axis) return points_per_axis - 1;
        return k;
    }

    bool contains(double q) const { return q > -0.5 * box_length && q < 0.5 * box_length; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.num_particles == b.num_particles && a.points_per_axis == b.points_per_axis &&
               a.box_length == b.box_length && a.masses == b.masses;
    }

private:
    std::size_t cells_ = 0;
};

}  // namespace collapse_lab
