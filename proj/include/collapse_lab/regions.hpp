#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/matter_density.hpp"

namespace collapse_lab {

// Ordered disjoint intervals marking designated branch supports; everything
// outside them counts as the tail region.
struct RegionPartition {
    std::vector<std::pair<double, double>> intervals;

    RegionPartition() = default;

    explicit RegionPartition(std::vector<std::pair<double, double>> ivals)
        : intervals(std::move(ivals)) {
        std::sort(intervals.begin(), intervals.end());
        for (const auto& [a, b] : intervals)
            if (!(a < b)) throw DomainError("partition interval is empty or inverted");
        for (std::size_t i = 1; i < intervals.size(); ++i)
            if (intervals[i].first <= intervals[i - 1].second)
                throw DomainError("partition intervals overlap");
    }

    std::size_t size() const { return intervals.size(); }
};

// Region masses normalized by the total mass; together with the tail
// fraction these sum to one.
inline std::vector<double> branch_weights(const MatterDensityField& field,
                                          const RegionPartition& partition) {
    std::vector<double> weights;
    weights.reserve(partition.size());
    for (const auto& [a, b] : partition.intervals)
        weights.push_back(region_mass(field, a, b) / field.total_mass);
    return weights;
}

// Fraction of the total mass outside every designated region.
inline double bare_tail_mass(const MatterDensityField& field, const RegionPartition& partition) {
    double inside = 0.0;
    for (const auto& [a, b] : partition.intervals) inside += region_mass(field, a, b);
    return (field.total_mass - inside) / field.total_mass;
}

}  // namespace collapse_lab
