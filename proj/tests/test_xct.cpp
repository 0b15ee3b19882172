#include <doctest.h>

#include <cmath>
#include <random>

#include "jbmir/errors.hpp"
#include "jbmir/xct.hpp"
#include "test_util.hpp"

using namespace jbmir;

namespace {

ScalarField centered_disk(const GridGeometry& g, double radius, double value) {
    ScalarField f(g);
    for (int r = 0; r < g.ny; ++r)
        for (int c = 0; c < g.nx; ++c)
            if (std::hypot(g.x_of(c), g.y_of(r)) <= radius) f.at(r, c) = value;
    return f;
}

}  // namespace

TEST_CASE("scan geometry places views over [0, pi) and rays symmetric about the center") {
    ScanGeometry s;
    CHECK(s.angle(0) == 0.0);
    CHECK(s.angle(15) == doctest::Approx(M_PI / 2));
    CHECK(s.offset(0) == doctest::Approx(-24.75));
    CHECK(s.offset(99) == doctest::Approx(24.75));
    CHECK(s.size() == 3000u);
    s.ray_spacing = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("projection of a disk follows the chord length 2 c sqrt(R^2 - s^2) in every view") {
    GridGeometry g;
    const double R = 10.0, c = 2.0;
    const ScalarField f = centered_disk(g, R, c);
    ScanGeometry scan;
    const Sinogram p = RadonOperator(g, scan).forward(f);
    for (int v = 0; v < scan.n_views; ++v)
        for (int m = 0; m < scan.n_rays; ++m) {
            const double s = scan.offset(m);
            if (std::abs(s) > R - 1.0) continue;
            const double chord = 2.0 * c * std::sqrt(R * R - s * s);
            // staircase boundary plus bilinear blur: about one pixel of chord length
            CHECK(std::abs(p.at(v, m) - chord) < 2.0 * c * g.h);
        }
    // rays that miss the disk by more than a pixel see nothing
    for (int v = 0; v < scan.n_views; ++v) CHECK(p.at(v, 0) == 0.0);
}

TEST_CASE("a single-pixel image projects to total mass h^2 per view") {
    GridGeometry g = test::small_grid(32);
    ScalarField f(g);
    f.at(10, 20) = 1.0;
    ScanGeometry scan{12, 200, 0.25 * g.h, 0.1};
    const Sinogram p = RadonOperator(g, scan).forward(f);
    for (int v = 0; v < scan.n_views; ++v) {
        double mass = 0.0;
        for (int m = 0; m < scan.n_rays; ++m) mass += p.at(v, m) * scan.ray_spacing;
        // the bilinear hat integrates to h^2 in the plane; ray sums approximate it
        CHECK(mass == doctest::Approx(g.h * g.h).epsilon(0.03));
    }
}

TEST_CASE("adjoint identity <Ru, g> = <u, R^T g> on random pairs") {
    GridGeometry g = test::small_grid(64);
    ScanGeometry scan{18, 70, g.h, 0.5 * g.h};
    const RadonOperator op(g, scan);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const ScalarField u = test::random_field(g, rng, -1.0, 1.0);
        Sinogram s(scan);
        for (auto& x : s.values) x = d(rng);
        const Sinogram ru = op.forward(u);
        const ScalarField rts = op.adjoint(s);
        const double lhs = inner(ru.values, s.values);
        const double rhs = inner(u.span(), rts.span());
        CHECK(std::abs(lhs - rhs) <= 1e-12 * norm2(ru.values) * norm2(s.values));
    }
}

TEST_CASE("transpose stores every entry once") {
    GridGeometry g = test::small_grid(16);
    const RadonOperator op(g, ScanGeometry{6, 20, 2.5, 1.0});
    const CsrMatrix& a = op.matrix();
    const CsrMatrix t = a.transposed();
    CHECK(t.rows == a.cols);
    CHECK(t.vals.size() == a.vals.size());
    const CsrMatrix back = t.transposed();
    CHECK(back.row_ptr == a.row_ptr);
    CHECK(back.col_idx == a.col_idx);
    CHECK(back.vals == a.vals);
}

TEST_CASE("operators reject fields and sinograms of another geometry") {
    GridGeometry g = test::small_grid(16);
    ScanGeometry scan{6, 20, 2.5, 1.0};
    const RadonOperator op(g, scan);
    CHECK_THROWS_AS(op.forward(ScalarField(test::small_grid(17))), GeometryMismatch);
    ScanGeometry other = scan;
    other.n_views = 7;
    CHECK_THROWS_AS(op.adjoint(Sinogram(other)), GeometryMismatch);
}
