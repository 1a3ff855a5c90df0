#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "collapse_lab/grw.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/split_step.hpp"
#include "collapse_lab/wavefunction.hpp"
#include "oracles.hpp"

using namespace collapse_lab;

TEST_CASE("single-particle field equals |psi|^2", "[matter]") {
    const GridSpec grid(1, 256, 20.0, {1.0});
    const std::vector<double> c{0.5}, w{1.1}, p{0.3};
    const WaveFunction psi = gaussian_packet(grid, c, w, p);
    const MatterDensityField field = matter_density(psi);
    double diff = 0.0;
    for (std::size_t k = 0; k < field.density.size(); ++k)
        diff = std::max(diff, std::abs(field.density[k] - std::norm(psi.amplitudes()[k])));
    CHECK(diff < 1e-12);
    CHECK(std::abs(field.total_mass - 1.0) < 1e-9);
}

TEST_CASE("two-particle lumps carry their particle masses", "[matter]") {
    const GridSpec grid(2, 128, 24.0, {1.0, 2.0});
    const std::vector<double> centers{-3.0, 3.0}, widths{0.55, 0.55}, momenta{0.0, 0.0};
    const WaveFunction psi = gaussian_packet(grid, centers, widths, momenta);
    const MatterDensityField field = matter_density(psi);
    CHECK(region_mass(field, -12.0, 0.0) == Approx(1.0).margin(1e-6));
    CHECK(region_mass(field, 0.0, 12.0) == Approx(2.0).margin(1e-6));
    CHECK(std::abs(field.total_mass - 3.0) < 1e-9);
}

TEST_CASE("symmetric cat splits the total mass between regions", "[matter]") {
    const GridSpec grid(2, 128, 24.0, {1.0, 1.0});
    const std::vector<double> ll{-4.0, -4.0}, rr{4.0, 4.0}, widths{0.8, 0.8}, mom{0.0, 0.0};
    const WaveFunction cat = superpose({{1.0, gaussian_packet(grid, ll, widths, mom)},
                                        {1.0, gaussian_packet(grid, rr, widths, mom)}});
    const MatterDensityField field = matter_density(cat);
    CHECK(region_mass(field, -12.0, 0.0) == Approx(1.0).margin(1e-6));
    CHECK(region_mass(field, 0.0, 12.0) == Approx(1.0).margin(1e-6));
}

TEST_CASE("mass is conserved under evolution and collapses", "[matter]") {
    const GridSpec grid(1, 256, 20.0, {1.5});
    const std::vector<double> left{-3.0}, right{3.0}, w{0.7};
    WaveFunction psi = superpose({{std::sqrt(0.6), gaussian_packet(grid, left, w)},
                                  {std::sqrt(0.4), gaussian_packet(grid, right, w)}});
    CHECK(std::abs(matter_density(psi).total_mass - 1.5) < 1e-9);
    psi = evolve(psi, HamiltonianSpec::free_particles(), 0.3, 1e-3);
    CHECK(std::abs(matter_density(psi).total_mass - 1.5) < 1e-9);
    GrwParams params;
    params.alpha = 4.0;
    psi = apply_collapse(psi, 0, 3.0, params);
    CHECK(std::abs(matter_density(psi).total_mass - 1.5) < 1e-9);
}

TEST_CASE("field positivity and linearity in the masses", "[matter]") {
    const std::vector<double> c{1.0}, w{1.0};
    const GridSpec unit_grid(1, 128, 16.0, {1.0});
    const GridSpec doubled_grid(1, 128, 16.0, {2.0});
    const WaveFunction psi_unit = gaussian_packet(unit_grid, c, w);
    const WaveFunction psi_doubled = gaussian_packet(doubled_grid, c, w);
    const MatterDensityField unit = matter_density(psi_unit);
    const MatterDensityField doubled = matter_density(psi_doubled);
    double min_value = 1.0, linearity = 0.0;
    for (std::size_t k = 0; k < unit.density.size(); ++k) {
        min_value = std::min(min_value, unit.density[k]);
        linearity = std::max(linearity, std::abs(doubled.density[k] - 2.0 * unit.density[k]));
    }
    CHECK(min_value >= 0.0);
    CHECK(linearity < 1e-12);
}

TEST_CASE("region masses are additive and complete", "[matter]") {
    const GridSpec grid(1, 256, 20.0, {1.0});
    const std::vector<double> c{0.0}, w{1.0};
    const MatterDensityField field = matter_density(gaussian_packet(grid, c, w));

    SECTION("whole box recovers the total mass") {
        CHECK(std::abs(region_mass(field, -10.0, 10.0) - field.total_mass) < 1e-9);
    }
    SECTION("point interval carries no mass away from sites") {
        CHECK(region_mass(field, 1.003, 1.003) == 0.0);
    }
    SECTION("disjoint intervals add up") {
        const double split = region_mass(field, -10.0, -1.0) + region_mass(field, -0.999, 10.0);
        CHECK(split == Approx(region_mass(field, -10.0, 10.0)).margin(1e-12));
    }
    SECTION("inverted interval is rejected") {
        CHECK_THROWS_AS(region_mass(field, 2.0, -2.0), DomainError);
    }
}

TEST_CASE("partition weights and tail fraction sum to one", "[matter]") {
    const GridSpec grid(1, 256, 20.0, {1.0});
    const std::vector<double> left{-4.0}, right{4.0}, w{0.6};
    const WaveFunction cat = superpose({{std::sqrt(0.7), gaussian_packet(grid, left, w)},
                                        {std::sqrt(0.3), gaussian_packet(grid, right, w)}});
    const MatterDensityField field = matter_density(cat);
    const RegionPartition partition({{-6.0, -2.0}, {2.0, 6.0}});
    const std::vector<double> weights = branch_weights(field, partition);
    const double tail = bare_tail_mass(field, partition);
    CHECK(weights.size() == 2);
    CHECK(weights[0] + weights[1] + tail == Approx(1.0).margin(1e-9));
    CHECK(weights[0] == Approx(0.7).margin(1e-3));
}
