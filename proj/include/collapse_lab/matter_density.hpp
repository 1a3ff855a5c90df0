#pragma once

#include <cstddef>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

// Mass density on the 1-D spatial axis: the mass-weighted sum of the
// single-particle marginals of |psi|^2. Only this total field is treated as
// the output ontology; per-particle components stay internal.
struct MatterDensityField {
    std::vector<double> axis;
    std::vector<double> density;
    double spacing = 0.0;
    double total_mass = 0.0;
};

inline MatterDensityField matter_density(const WaveFunction& psi) {
    const GridSpec& grid = psi.grid();
    MatterDensityField field;
    field.spacing = grid.spacing();
    field.axis.resize(static_cast<std::size_t>(grid.points_per_axis));
    field.density.assign(static_cast<std::size_t>(grid.points_per_axis), 0.0);
    for (int k = 0; k < grid.points_per_axis; ++k)
        field.axis[static_cast<std::size_t>(k)] = grid.coord(k);
    for (int p = 0; p < grid.num_particles; ++p) {
        const std::vector<double> marginal = marginal_density(psi, p);
        const double mass = grid.masses[static_cast<std::size_t>(p)];
        for (std::size_t k = 0; k < field.density.size(); ++k)
            field.density[k] += mass * marginal[k];
    }
    double total = 0.0;
    for (double d : field.density) total += d;
    field.total_mass = total * field.spacing;
    return field;
}

// Mass inside [a, b]: Riemann sum over the sites whose coordinate lies in the
// closed interval. Additive over disjoint intervals.
inline double region_mass(const MatterDensityField& field, double a, double b) {
    if (!(a <= b)) throw DomainError("region interval is inverted");
    double sum = 0.0;
    for (std::size_t k = 0; k < field.axis.size(); ++k)
        if (field.axis[k] >= a && field.axis[k] <= b) sum += field.density[k];
    return sum * field.spacing;
}

}  // namespace collapse_lab
