#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "collapse_lab/analysis.hpp"
#include "collapse_lab/grw.hpp"
#include "collapse_lab/matter_density.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/split_step.hpp"
#include "collapse_lab/wavefunction.hpp"
#include "oracles.hpp"

using namespace collapse_lab;

namespace {

WaveFunction packet(const GridSpec& grid, double c, double w, double p = 0.0) {
    const std::vector<double> cs{c}, ws{w}, ps{p};
    return gaussian_packet(grid, cs, ws, ps);
}

WaveFunction cat_state(const GridSpec& grid, double separation, double width, double left_weight) {
    return superpose({{std::sqrt(left_weight), packet(grid, -0.5 * separation, width)},
                      {std::sqrt(1.0 - left_weight), packet(grid, 0.5 * separation, width)}});
}

}  // namespace

TEST_CASE("bare tail fractions", "[analysis]") {
    const GridSpec grid(1, 512, 24.0, {1.0});

    SECTION("compactly supported mass has no tail") {
        GrwParams compact;
        compact.kernel = CollapseKernel::compact_support;
        compact.compact_half_width = 1.5;
        const WaveFunction pinched = apply_collapse(packet(grid, 0.0, 1.0), 0, 0.0, compact);
        const RegionPartition region({{-1.6, 1.6}});
        CHECK(bare_tail_mass(matter_density(pinched), region) < 1e-12);
    }

    SECTION("Gaussian lump outside three sigma") {
        const double sigma = 1.0;
        const WaveFunction psi = packet(grid, 0.0, sigma);
        const RegionPartition region({{-3.0 * sigma, 3.0 * sigma}});
        const double tail = bare_tail_mass(matter_density(psi), region);
        const double expected = 2.0 * oracles::gaussian_tail(3.0);
        CHECK(std::abs(tail - expected) / expected < 0.10);
    }

    SECTION("post-collapse cat keeps its tail below 1e-3") {
        GrwParams params;
        params.alpha = 4.0;
        const WaveFunction cat = cat_state(grid, 10.0, 1.0, 0.5);
        const WaveFunction collapsed = apply_collapse(cat, 0, 5.0, params);
        const RegionPartition regions({{-9.0, -1.0}, {1.0, 9.0}});
        CHECK(bare_tail_mass(matter_density(collapsed), regions) <= 1e-3);
    }
}

TEST_CASE("branch weights track collapse arithmetic", "[analysis]") {
    const GridSpec grid(1, 1024, 16.0, {1.0});
    const RegionPartition regions({{-5.0, -0.25}, {0.25, 5.0}});

    SECTION("pre-collapse equal cat") {
        const std::vector<double> w =
            branch_weights(matter_density(cat_state(grid, 4.0, 0.4, 0.5)), regions);
        CHECK(w[0] == Approx(0.5).margin(1e-6));
        CHECK(w[1] == Approx(0.5).margin(1e-6));
    }

    SECTION("Gaussian collapse suppresses by the kernel ratio") {
        // Narrow branches keep the finite-width correction e^{8 alpha sigma^2 s^2}
        // well inside the 5% tolerance.
        const GridSpec fine(1, 2048, 16.0, {1.0});
        GrwParams params;
        params.alpha = 1.0;
        const double separation = 2.0;
        const WaveFunction collapsed =
            apply_collapse(cat_state(fine, separation, 0.025, 0.5), 0, 0.5 * separation, params);
        const std::vector<double> w = branch_weights(matter_density(collapsed), regions);
        const double expected = std::exp(-2.0 * params.alpha * separation * separation);
        CHECK(std::abs(w[0] / w[1] - expected) / expected < 0.05);
    }

    SECTION("compact collapse zeroes the far branch") {
        GrwParams params;
        params.kernel = CollapseKernel::compact_support;
        params.compact_half_width = 1.0;
        const WaveFunction collapsed =
            apply_collapse(cat_state(grid, 4.0, 0.3, 0.5), 0, 2.0, params);
        const std::vector<double> w = branch_weights(matter_density(collapsed), regions);
        CHECK(w[0] <= 1e-12);
    }
}

TEST_CASE("distortion metric separates shape change from weight loss", "[analysis]") {
    // Mild kernel so the low branch survives above the 1e-14 weight floor
    // (weight ratio e^{-2 alpha s^2} = e^{-7.2}).
    const GridSpec grid(1, 512, 20.0, {1.0});
    const double sigma = 0.35, separation = 6.0;
    const WaveFunction cat = cat_state(grid, separation, sigma, 0.5);
    const std::pair<double, double> left_region{-5.0, -1.0};

    SECTION("no collapse, no distortion") {
        CHECK(distortion_metric(cat, cat, left_region) < 1e-10);
    }

    SECTION("a collapse on the other branch tilts the low branch") {
        GrwParams params;
        params.alpha = 0.1;
        const WaveFunction collapsed = apply_collapse(cat, 0, 0.5 * separation, params);
        CHECK(distortion_metric(collapsed, cat, left_region) >= 1e-4);
    }

    SECTION("a flat kernel leaves no distortion") {
        GrwParams params;
        params.alpha = 1e-8;
        const WaveFunction collapsed = apply_collapse(cat, 0, 0.5 * separation, params);
        CHECK(distortion_metric(collapsed, cat, left_region) <= 1e-6);
    }

    SECTION("pseudometric properties") {
        GrwParams params;
        params.alpha = 0.05;
        const WaveFunction a = cat;
        const WaveFunction b = apply_collapse(cat, 0, 2.5, params);
        const WaveFunction c = apply_collapse(cat, 0, 2.0, params);
        const double ab = distortion_metric(a, b, left_region);
        const double ba = distortion_metric(b, a, left_region);
        const double ac = distortion_metric(a, c, left_region);
        const double cb = distortion_metric(c, b, left_region);
        CHECK(std::abs(ab - ba) < 1e-12);
        CHECK(ab <= ac + cb + 1e-9);
    }

    SECTION("eliminated branches are rejected") {
        // A strong Gaussian kernel pushes the far weight below the floor...
        GrwParams strong;
        strong.alpha = 4.0;
        const GridSpec wide(1, 512, 40.0, {1.0});
        const WaveFunction unit_cat = cat_state(wide, 5.0, 1.0, 0.5);
        const WaveFunction crushed = apply_collapse(unit_cat, 0, 2.5, strong);
        CHECK_THROWS_AS(distortion_metric(crushed, unit_cat, {-6.5, -0.5}), UndefinedBranchError);
        // ...and a compact kernel zeroes it outright.
        GrwParams compact;
        compact.kernel = CollapseKernel::compact_support;
        compact.compact_half_width = 1.0;
        const WaveFunction tight = cat_state(wide, 8.0, 0.3, 0.5);
        const WaveFunction eliminated = apply_collapse(tight, 0, 4.0, compact);
        CHECK_THROWS_AS(distortion_metric(eliminated, tight, {-5.0, -3.0}), UndefinedBranchError);
    }
}

TEST_CASE("collapses break exchange symmetry", "[analysis]") {
    const GridSpec grid(2, 128, 20.0, {1.0, 1.0});
    const std::vector<double> lr{-2.0, 2.0}, rl{2.0, -2.0}, widths{0.5, 0.5}, mom{0.0, 0.0};
    const WaveFunction sym = superpose({{1.0, gaussian_packet(grid, lr, widths, mom)},
                                        {1.0, gaussian_packet(grid, rl, widths, mom)}});
    CHECK(symmetry_violation(sym) <= 1e-12);

    GrwParams params;
    params.alpha = 4.0;
    const WaveFunction hit = apply_collapse(sym, 0, 2.0, params);
    CHECK(symmetry_violation(hit) >= 1e-3);

    // Control: both labels hit identically at the symmetry point.
    const GridSpec centered(2, 128, 20.0, {1.0, 1.0});
    const std::vector<double> cc{-1.0, 1.0}, cc_swapped{1.0, -1.0};
    const WaveFunction sym_centered =
        superpose({{1.0, gaussian_packet(centered, cc, widths, mom)},
                   {1.0, gaussian_packet(centered, cc_swapped, widths, mom)}});
    const WaveFunction both = apply_collapse(apply_collapse(sym_centered, 0, 0.0, params), 1, 0.0, params);
    CHECK(symmetry_violation(both) <= 1e-9);

    const GridSpec grid1(1, 64, 16.0, {1.0});
    CHECK_THROWS_AS(symmetry_violation(packet(grid1, 0.0, 1.0)), UnsupportedArityError);
}

TEST_CASE("flashes are the events' space-time projection", "[analysis]") {
    CHECK(export_flashes({}).empty());

    const GridSpec grid(1, 128, 20.0, {1.0});
    GrwParams params;
    params.lambda_rate = 20.0;
    const GrwRunResult run =
        run_grw(packet(grid, 0.0, 1.0), HamiltonianSpec::zero(), params, 1.0, 1e-3, 5);
    const std::vector<Flash> flashes = export_flashes(run.events);
    REQUIRE(flashes.size() == run.events.size());
    CHECK(!flashes.empty());
    for (std::size_t i = 0; i < flashes.size(); ++i) {
        CHECK(flashes[i].time == run.events[i].time);
        CHECK(flashes[i].center == run.events[i].center);
    }
}

TEST_CASE("decoherence scan matches the kernel decay law", "[analysis]") {
    const GridSpec grid(1, 64, 16.0, {1.0});
    const double separation = 2.0;
    const WaveFunction cat = cat_state(grid, separation, 0.5, 0.5);
    GrwParams params;
    params.lambda_rate = 4.0;
    params.alpha = 4.0;
    ScanSettings settings;
    settings.duration = 0.5;
    settings.dt = 1e-2;
    settings.output_points = 26;
    settings.replicas = 300;
    settings.probe_left = -0.5 * separation;
    settings.probe_right = 0.5 * separation;
    settings.seed = 91;
    settings.threads = 2;

    const DecoherenceCurve curve = decoherence_scan(cat, HamiltonianSpec::zero(), params, settings);
    CHECK(curve.initial_coherence == Approx(1.0).margin(1e-6));
    for (double g : curve.coherence) {
        CHECK(g >= 0.0);
        CHECK(g <= 1.0 + 1e-12);
    }
    const double fitted = fit_decay_rate(curve, 0.2);
    const double expected =
        params.lambda_rate *
        (1.0 - std::exp(-0.5 * params.alpha * separation * separation));
    CHECK(std::abs(fitted - expected) / expected < 0.10);  // smoke bound; acceptance is tighter

    // No re-coherence under H = 0: non-increasing within Monte Carlo noise.
    for (std::size_t i = 1; i < curve.coherence.size(); ++i)
        CHECK(curve.coherence[i] <= curve.coherence[i - 1] + 0.05);

    SECTION("a vanishing rate leaves the curve flat") {
        GrwParams quiet = params;
        quiet.lambda_rate = 1e-12;
        ScanSettings fast = settings;
        fast.replicas = 3;
        const DecoherenceCurve flat = decoherence_scan(cat, HamiltonianSpec::zero(), quiet, fast);
        for (double g : flat.coherence) CHECK(std::abs(g - flat.initial_coherence) < 1e-9);
    }

    SECTION("probe separation of one grid spacing decoheres slowly") {
        // alpha spacing^2 / 2 = 7.8e-3 on the finer grid, so the rate must
        // stay below the 2% bound.
        const GridSpec fine(1, 256, 16.0, {1.0});
        const WaveFunction fine_cat = cat_state(fine, separation, 0.5, 0.5);
        ScanSettings close = settings;
        close.replicas = 200;
        close.duration = 2.0;
        close.probe_left = -0.5 * separation;
        close.probe_right = -0.5 * separation + fine.spacing();
        const DecoherenceCurve slow =
            decoherence_scan(fine_cat, HamiltonianSpec::zero(), params, close);
        CHECK(fit_decay_rate(slow, 0.2) <= 0.02 * params.lambda_rate);
    }
}

TEST_CASE("frequency scaling keeps the small-separation rate invariant", "[analysis]") {
    const GridSpec grid(1, 256, 4.0, {1.0});
    const double separation = 0.2;
    const WaveFunction cat = cat_state(grid, separation, 0.05, 0.5);
    GrwParams base;
    base.lambda_rate = 20.0;
    base.alpha = 4.0;
    const RegionPartition regions({{-1.0, -0.05}, {0.05, 1.0}});
    ScanSettings settings;
    settings.duration = 1.0;
    settings.dt = 1e-2;
    settings.output_points = 21;
    settings.replicas = 150;  // smoke level; the acceptance suite runs more
    settings.probe_left = -0.5 * separation;
    settings.probe_right = 0.5 * separation;
    settings.seed = 33;
    settings.threads = 2;

    const std::vector<int> levels{1, 4};
    const auto scan = continuum_limit_scan(cat, HamiltonianSpec::zero(), base, levels, regions,
                                           settings);
    REQUIRE(scan.size() == 2);

    // Level 1 must replay the plain scan bit-for-bit.
    const DecoherenceCurve direct = decoherence_scan(cat, HamiltonianSpec::zero(), base, settings);
    for (std::size_t i = 0; i < direct.coherence.size(); ++i)
        CHECK(scan[0].curve.coherence[i] == direct.coherence[i]);

    CHECK(std::abs(scan[1].fitted_rate - scan[0].fitted_rate) / scan[0].fitted_rate < 0.15);
    CHECK(scan[1].p99_weight_jump < scan[0].p99_weight_jump);
    CHECK(scan[1].max_weight_jump < scan[0].max_weight_jump);
}
