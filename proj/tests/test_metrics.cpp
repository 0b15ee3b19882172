#include <doctest.h>

#include <cmath>
#include <random>

#include "jbmir/errors.hpp"
#include "jbmir/metrics.hpp"
#include "jbmir/phantom.hpp"
#include "test_util.hpp"

using namespace jbmir;

TEST_CASE("SSIM of a fixed pair matches the frozen reference value") {
    GridGeometry g = test::small_grid(4);
    ScalarField t(g), r(g);
    for (std::size_t k = 0; k < 16; ++k) {
        t[k] = static_cast<double>(k);
        r[k] = static_cast<double>(k * k) / 10.0;
    }
    SsimParams p;
    p.domain = SsimDomain::full;
    const SsimReport rep = ssim_report(r, t, p);
    // evaluated independently in double precision
    CHECK(rep.value == doctest::Approx(0.8775745459932777).epsilon(1e-13));
    CHECK(rep.L == 15.0);
    CHECK(rep.c1 == doctest::Approx(0.0225));
    CHECK(rep.c2 == doctest::Approx(0.2025));
    CHECK(rep.pixels == 16u);
}

TEST_CASE("identical images score exactly one in either domain") {
    GridGeometry g;
    const ScalarField u = rasterize(builtin_phantom("phantom2"), g, Modality::dot);
    CHECK(ssim_global(u, u) == 1.0);
    SsimParams full;
    full.domain = SsimDomain::full;
    CHECK(ssim_global(u, u, full) == 1.0);
    const ScalarField c(g, 3.0);
    CHECK(ssim_global(c, c) == 1.0);
    CHECK(ssim_report(c, c).L == 1.0);
}

TEST_CASE("SSIM is at most one and drops as noise grows") {
    GridGeometry g;
    const ScalarField t = rasterize(builtin_phantom("phantom1"), g, Modality::xct);
    std::mt19937_64 rng(1);
    double prev = 1.0;
    for (double sigma : {0.05, 0.2, 0.8}) {
        std::normal_distribution<double> d(0.0, sigma);
        ScalarField r = t;
        for (std::size_t k = 0; k < r.size(); ++k) r[k] += d(rng);
        const double s = ssim_global(r, t);
        CHECK(s < prev);
        CHECK(s <= 1.0);
        prev = s;
    }
}

TEST_CASE("the disk domain ignores pixels outside the disk") {
    GridGeometry g;
    const ScalarField t = rasterize(builtin_phantom("phantom1"), g, Modality::xct);
    ScalarField r = t;
    r.at(0, 0) = 100.0;
    CHECK(ssim_global(r, t) == 1.0);
    SsimParams full;
    full.domain = SsimDomain::full;
    CHECK(ssim_global(r, t, full) < 1.0);
    SsimParams fixed;
    fixed.dynamic_range = 4.0;
    CHECK(ssim_report(r, t, fixed).L == 4.0);
}

TEST_CASE("line profile follows the column nearest to x") {
    GridGeometry g;
    ScalarField u(g);
    for (int r = 0; r < g.ny; ++r)
        for (int c = 0; c < g.nx; ++c) u.at(r, c) = 1000.0 * c + r;
    const auto prof = line_profile(u, 10.1);
    REQUIRE(prof.size() == 100u);
    CHECK(prof[0].y == doctest::Approx(24.75));
    // x = 10.1 lies closest to column 70 (x = 10.25)
    CHECK(prof[0].value == 70000.0);
    CHECK(prof[99].value == 70099.0);
    CHECK_THROWS_AS(line_profile(u, 30.0), GeometryMismatch);
}

TEST_CASE("region means and mismatches") {
    GridGeometry g = test::small_grid(4);
    ScalarField u(g);
    for (std::size_t k = 0; k < 16; ++k) u[k] = static_cast<double>(k);
    std::vector<unsigned char> m(16, 0);
    m[1] = m[3] = 1;
    CHECK(region_mean(u, m) == 2.0);
    CHECK_THROWS_AS(region_mean(u, std::vector<unsigned char>(16, 0)), GeometryMismatch);
    CHECK_THROWS_AS(region_mean(u, std::vector<unsigned char>(3, 1)), GeometryMismatch);
    CHECK_THROWS_AS(ssim_global(u, ScalarField(test::small_grid(5))), GeometryMismatch);
}
