#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"

namespace collapse_lab {

// Per-particle external potential evaluated on the axis.
struct ExternalPotential {
    enum class Kind { free, harmonic, double_well };

    Kind kind = Kind::free;
    double omega = 1.0;   // harmonic: 0.5 m omega^2 q^2
    double well_a = 1.0;  // double well: a (q^2 - b^2)^2
    double well_b = 1.0;

    double evaluate(double q, double mass) const {
        switch (kind) {
            case Kind::free:
                return 0.0;
            case Kind::harmonic:
                return 0.5 * mass * omega * omega * q * q;
            case Kind::double_well: {
                const double u = q * q - well_b * well_b;
                return well_a * u * u;
            }
        }
        return 0.0;
    }

    bool is_zero() const { return kind == Kind::free; }
};

// Optional pair interaction, a function of q_i - q_j.
struct PairPotential {
    enum class Kind { none, gaussian_well };

    Kind kind = Kind::none;
    double depth = 1.0;
    double width = 1.0;

    double evaluate(double separation) const {
        if (kind == Kind::none) return 0.0;
        const double u = separation / width;
        return -depth * std::exp(-0.5 * u * u);
    }

    bool is_zero() const { return kind == Kind::none; }
};

// Kinetic term -(1/2m_i) d^2/dq_i^2 per particle (implied by the grid masses)
// plus the potential choices above. kinetic=false gives the H = 0 setups used
// to isolate the collapse process.
struct HamiltonianSpec {
    bool kinetic = true;
    std::vector<ExternalPotential> external;  // one per particle, or empty for all-free
    PairPotential pair;
    double dt_max = 0.1;

    static HamiltonianSpec zero() {
        HamiltonianSpec h;
        h.kinetic = false;
        return h;
    }

    static HamiltonianSpec free_particles() { return HamiltonianSpec{}; }

    static HamiltonianSpec harmonic(double omega) {
        HamiltonianSpec h;
        h.external.push_back({ExternalPotential::Kind::harmonic, omega, 1.0, 1.0});
        return h;
    }

    const ExternalPotential& external_for(int particle) const {
        static const ExternalPotential kFree{};
        if (external.empty()) return kFree;
        if (external.size() == 1) return external.front();
        return external.at(static_cast<std::size_t>(particle));
    }

    bool has_potential() const {
        if (!pair.is_zero()) return true;
        for (const auto& pot : external)
            if (!pot.is_zero()) return true;
        return false;
    }

    bool is_zero() const { return !kinetic && !has_potential(); }
};

// Potential energy per grid cell; empty when the potential vanishes
// identically. Throws if any value fails to be finite on the grid.
inline std::vector<double> build_potential_table(const GridSpec& grid, const HamiltonianSpec& ham) {
    if (!ham.external.empty() && ham.external.size() != 1 &&
        ham.external.size() != static_cast<std::size_t>(grid.num_particles))
        throw DomainError("external potential list does not match the particle count");
    if (!ham.has_potential()) return {};
    const auto m = static_cast<std::size_t>(grid.points_per_axis);
    std::vector<double> table(grid.cells(), 0.0);
    std::vector<int> sites(static_cast<std::size_t>(grid.num_particles), 0);
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        std::size_t rem = flat;
        for (int p = grid.num_particles; p-- > 0;) {
            sites[static_cast<std::size_t>(p)] = static_cast<int>(rem % m);
            rem /= m;
        }
        double v = 0.0;
        for (int p = 0; p < grid.num_particles; ++p)
            v += ham.external_for(p).evaluate(grid.coord(sites[static_cast<std::size_t>(p)]),
                                              grid.masses[static_cast<std::size_t>(p)]);
        if (!ham.pair.is_zero()) {
            for (int i = 0; i < grid.num_particles; ++i)
                for (int j = i + 1; j < grid.num_particles; ++j)
                    v += ham.pair.evaluate(grid.coord(sites[static_cast<std::size_t>(i)]) -
                                           grid.coord(sites[static_cast<std::size_t>(j)]));
        }
        if (!std::isfinite(v)) throw DomainError("potential is not finite on the grid");
        table[flat] = v;
    }
    return table;
}

}  // namespace collapse_lab
