#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "collapse_lab/grid.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/wavefunction.hpp"
#include "oracles.hpp"

using namespace collapse_lab;

namespace {

GridSpec grid1(int m = 256, double length = 20.0) { return GridSpec(1, m, length, {1.0}); }

WaveFunction packet1(const GridSpec& grid, double center, double width, double momentum = 0.0) {
    const std::vector<double> c{center}, w{width}, p{momentum};
    return gaussian_packet(grid, c, w, p);
}

// Quadrature of |psi|^2 over a coordinate window of particle 0.
double window_weight(const WaveFunction& psi, double a, double b) {
    const std::vector<double> marginal = marginal_density(psi, 0);
    const GridSpec& grid = psi.grid();
    double sum = 0.0;
    for (int k = 0; k < grid.points_per_axis; ++k) {
        const double q = grid.coord(k);
        if (q >= a && q <= b) sum += marginal[static_cast<std::size_t>(k)];
    }
    return sum * grid.spacing();
}

}  // namespace

TEST_CASE("grid construction enforces its invariants", "[config_space]") {
    CHECK_THROWS_AS(GridSpec(0, 256, 20.0, {}), DomainError);
    CHECK_THROWS_AS(GridSpec(1, 100, 20.0, {1.0}), DomainError);   // not a power of two
    CHECK_THROWS_AS(GridSpec(1, 256, -1.0, {1.0}), DomainError);
    CHECK_THROWS_AS(GridSpec(1, 256, 20.0, {0.0}), DomainError);
    CHECK_THROWS_AS(GridSpec(2, 256, 20.0, {1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(GridSpec(3, 1024, 20.0, {1.0, 1.0, 1.0}), GridCapacityError);  // 2^30 cells
    CHECK_NOTHROW(GridSpec(3, 256, 20.0, {1.0, 1.0, 1.0}));  // exactly the 2^24 cap

    const GridSpec grid(2, 128, 16.0, {1.0, 2.0});
    CHECK(grid.cells() == 128u * 128u);
    CHECK(grid.spacing() == Approx(0.125));
    CHECK(grid.coord(0) == Approx(-8.0));
    CHECK(grid.total_mass() == Approx(3.0));
}

TEST_CASE("gaussian packet invariants and preconditions", "[config_space]") {
    const GridSpec grid = grid1();

    SECTION("centered packet is symmetric and normalized") {
        const WaveFunction psi = packet1(grid, 0.0, 1.0);
        CHECK(std::abs(psi.norm_squared() - 1.0) < 1e-9);
        const auto& amp = psi.amplitudes();
        const int m = grid.points_per_axis;
        double asym = 0.0;
        for (int k = 1; k < m; ++k)
            asym = std::max(asym, std::abs(amp[static_cast<std::size_t>(k)] -
                                          amp[static_cast<std::size_t>(m - k)]));
        CHECK(asym < 1e-12);
    }

    SECTION("momentum is a pure phase: position marginal unchanged") {
        const WaveFunction rest = packet1(grid, 0.0, 1.0, 0.0);
        const WaveFunction moving = packet1(grid, 0.0, 1.0, 2.0);
        const auto d0 = marginal_density(rest, 0);
        const auto d2 = marginal_density(moving, 0);
        double diff = 0.0;
        for (std::size_t k = 0; k < d0.size(); ++k) diff = std::max(diff, std::abs(d0[k] - d2[k]));
        CHECK(diff < 1e-12);
    }

    SECTION("two-particle product peaks at the requested centers") {
        const GridSpec grid2(2, 128, 20.0, {1.0, 1.0});
        const std::vector<double> centers{-3.0, 3.0}, widths{1.0, 1.0}, momenta{0.0, 0.0};
        const WaveFunction psi = gaussian_packet(grid2, centers, widths, momenta);
        for (int p = 0; p < 2; ++p) {
            const auto marginal = marginal_density(psi, p);
            std::size_t peak = 0;
            for (std::size_t k = 0; k < marginal.size(); ++k)
                if (marginal[k] > marginal[peak]) peak = k;
            CHECK(std::abs(grid2.coord(static_cast<int>(peak)) - centers[static_cast<std::size_t>(p)]) <=
                  grid2.spacing());
        }
    }

    SECTION("error paths") {
        CHECK_THROWS_AS(packet1(grid, 0.0, 0.5 * grid.spacing()), ResolutionError);
        CHECK_THROWS_AS(packet1(grid, 11.0, 1.0), DomainError);
    }

    SECTION("normalization holds across random parameters") {
        Rng rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            const double c = (rng.uniform() - 0.5) * 10.0;
            const double w = 0.3 + rng.uniform() * 2.0;
            const double p = (rng.uniform() - 0.5) * 4.0;
            CHECK(std::abs(packet1(grid, c, w, p).norm_squared() - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("superpose weights, identity and error paths", "[config_space]") {
    const GridSpec grid = grid1(512, 40.0);
    const WaveFunction left = packet1(grid, -5.0, 1.0);
    const WaveFunction right = packet1(grid, 5.0, 1.0);

    SECTION("equal-weight orthogonal branches split 0.5/0.5") {
        const WaveFunction cat = superpose({{1.0 / std::sqrt(2.0), left},
                                            {1.0 / std::sqrt(2.0), right}});
        CHECK(std::abs(cat.norm_squared() - 1.0) < 1e-9);
        CHECK(window_weight(cat, -20.0, 0.0) == Approx(0.5).margin(1e-6));
        CHECK(window_weight(cat, 0.0, 20.0) == Approx(0.5).margin(1e-6));
    }

    SECTION("single branch is the identity") {
        const WaveFunction same = superpose({{1.0, left}});
        CHECK(l2_distance(same, left) < 1e-12);
    }

    SECTION("asymmetric weights survive normalization") {
        const WaveFunction cat =
            superpose({{std::sqrt(0.7), left}, {std::sqrt(0.3), right}});
        CHECK(window_weight(cat, -20.0, 0.0) == Approx(0.7).margin(1e-6));
    }

    SECTION("mismatched grids and zero coefficients are rejected") {
        const GridSpec other = grid1(256, 40.0);
        const WaveFunction foreign = packet1(other, 0.0, 1.0);
        CHECK_THROWS_AS(superpose({{1.0, left}, {1.0, foreign}}), IncompatibilityError);
        CHECK_THROWS_AS(superpose({{0.0, left}, {0.0, right}}), DegenerateInputError);
    }
}

TEST_CASE("marginal density reductions", "[config_space]") {
    SECTION("product state factorizes") {
        const GridSpec grid2(2, 128, 20.0, {1.0, 1.0});
        const std::vector<double> centers{-2.0, 3.0}, widths{0.8, 1.3}, momenta{1.0, -0.5};
        const WaveFunction psi = gaussian_packet(grid2, centers, widths, momenta);
        const GridSpec grid1d(1, 128, 20.0, {1.0});
        for (int p = 0; p < 2; ++p) {
            const std::vector<double> c{centers[static_cast<std::size_t>(p)]},
                w{widths[static_cast<std::size_t>(p)]}, mom{momenta[static_cast<std::size_t>(p)]};
            const WaveFunction factor = gaussian_packet(grid1d, c, w, mom);
            const auto expected = marginal_density(factor, 0);
            const auto actual = marginal_density(psi, p);
            double diff = 0.0;
            for (std::size_t k = 0; k < expected.size(); ++k)
                diff = std::max(diff, std::abs(expected[k] - actual[k]));
            CHECK(diff < 1e-10);
        }
    }

    SECTION("symmetric two-particle cat has bimodal marginals") {
        const GridSpec grid2(2, 128, 24.0, {1.0, 1.0});
        const std::vector<double> ll{-4.0, -4.0}, rr{4.0, 4.0}, widths{0.6, 0.6}, mom{0.0, 0.0};
        const WaveFunction cat =
            superpose({{1.0, gaussian_packet(grid2, ll, widths, mom)},
                       {1.0, gaussian_packet(grid2, rr, widths, mom)}});
        for (int p = 0; p < 2; ++p) {
            const auto marginal = marginal_density(cat, p);
            double left = 0.0, right = 0.0;
            for (int k = 0; k < grid2.points_per_axis; ++k) {
                const double q = grid2.coord(k);
                const double w = marginal[static_cast<std::size_t>(k)] * grid2.spacing();
                if (q >= -8.0 && q <= -1.0) left += w;
                if (q >= 1.0 && q <= 8.0) right += w;
            }
            CHECK(left == Approx(0.5).margin(1e-6));
            CHECK(right == Approx(0.5).margin(1e-6));
        }
    }

    SECTION("single particle marginal is |psi|^2 and sums to one") {
        const GridSpec grid = grid1();
        const WaveFunction psi = packet1(grid, 1.0, 1.2, 0.7);
        const auto marginal = marginal_density(psi, 0);
        double total = 0.0, diff = 0.0;
        for (int k = 0; k < grid.points_per_axis; ++k) {
            total += marginal[static_cast<std::size_t>(k)] * grid.spacing();
            diff = std::max(diff, std::abs(marginal[static_cast<std::size_t>(k)] -
                                           std::norm(psi.amplitudes()[static_cast<std::size_t>(k)])));
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
        CHECK(diff == 0.0);
        CHECK_THROWS_AS(marginal_density(psi, 1), DomainError);
    }
}

TEST_CASE("label swap is a unitary involution", "[config_space]") {
    const GridSpec grid2(2, 128, 20.0, {1.0, 1.0});
    const std::vector<double> ab{-2.0, 2.0}, ba{2.0, -2.0}, widths{1.0, 1.0}, mom{0.0, 0.0};
    const WaveFunction product_ab = gaussian_packet(grid2, ab, widths, mom);
    const WaveFunction product_ba = gaussian_packet(grid2, ba, widths, mom);

    SECTION("symmetrized state is a fixed point") {
        const WaveFunction sym = superpose({{1.0, product_ab}, {1.0, product_ba}});
        CHECK(l2_distance(sym, swap_labels(sym, 0, 1)) < 1e-12);
    }

    SECTION("antisymmetrized state flips sign") {
        const WaveFunction anti = superpose({{1.0, product_ab}, {-1.0, product_ba}});
        const WaveFunction swapped = swap_labels(anti, 0, 1);
        double sum = 0.0;
        for (std::size_t i = 0; i < anti.amplitudes().size(); ++i)
            sum += std::norm(anti.amplitudes()[i] + swapped.amplitudes()[i]);
        CHECK(std::sqrt(sum * grid2.cell_measure()) < 1e-12);
    }

    SECTION("product-state overlap formula") {
        // ||psi - S psi||^2 = 2 (1 - |<a|b>|^2) for psi = a(q1) b(q2).
        const GridSpec grid1d(1, 128, 20.0, {1.0});
        const std::vector<double> ca{-2.0}, cb{2.0}, w1{1.0}, m0{0.0};
        const WaveFunction a = gaussian_packet(grid1d, ca, w1, m0);
        const WaveFunction b = gaussian_packet(grid1d, cb, w1, m0);
        const double overlap = std::abs(inner_product(a, b));
        const double expected = 2.0 * (1.0 - overlap * overlap);
        const double measured = std::pow(l2_distance(product_ab, swap_labels(product_ab, 0, 1)), 2);
        CHECK(measured == Approx(expected).margin(1e-8));
    }

    SECTION("involution, norm preservation, label checks") {
        const WaveFunction twice = swap_labels(swap_labels(product_ab, 0, 1), 0, 1);
        CHECK(l2_distance(twice, product_ab) == 0.0);
        // The swap permutes amplitudes; only the summation order can differ.
        CHECK(swap_labels(product_ab, 0, 1).norm_squared() ==
              Approx(product_ab.norm_squared()).margin(1e-14));
        CHECK_THROWS_AS(swap_labels(product_ab, 0, 0), DomainError);
        CHECK_THROWS_AS(swap_labels(product_ab, 0, 2), DomainError);
    }
}

TEST_CASE("boundary mass stays negligible for interior packets", "[config_space]") {
    const WaveFunction psi = packet1(grid1(), 0.0, 1.0);
    CHECK(boundary_mass(psi) < 1e-6);
}
