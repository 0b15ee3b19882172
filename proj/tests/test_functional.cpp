#include <doctest.h>

#include <cmath>
#include <random>

#include "jbmir/errors.hpp"
#include "jbmir/functional.hpp"
#include "test_util.hpp"

using namespace jbmir;

namespace {

// Loop-by-loop evaluation of the regularisers, written without the library's
// gradient, divergence or SIMD kernels.
struct Oracle {
    const GridGeometry& g;

    double dx(const ScalarField& f, int r, int c) const { return c + 1 < g.nx ? (f.at(r, c + 1) - f.at(r, c)) / g.h : 0.0; }
    double dy(const ScalarField& f, int r, int c) const { return r + 1 < g.ny ? (f.at(r + 1, c) - f.at(r, c)) / g.h : 0.0; }

    double smooth(const ModalityParams& p, const ScalarField& u, const ScalarField& v) const {
        double s = 0.0;
        for (int r = 0; r < g.ny; ++r)
            for (int c = 0; c < g.nx; ++c) {
                const double a = dx(u, r, c), b = dy(u, r, c);
                s += v.at(r, c) * v.at(r, c) * (a * a + b * b) * g.h * g.h;
            }
        return p.alpha * s;
    }

    double edge(const ModalityParams& p, const ScalarField& v, const ScalarField& vo) const {
        double s = 0.0;
        for (int r = 0; r < g.ny; ++r)
            for (int c = 0; c < g.nx; ++c) {
                const double a = dx(v, r, c), b = dy(v, r, c);
                const double one_minus = 1.0 - v.at(r, c);
                const double d = vo.at(r, c) - v.at(r, c);
                s += (p.eps * (a * a + b * b) + one_minus * one_minus / (4.0 * p.eps)) * (1.0 + p.gamma * d * d) *
                     g.h * g.h;
            }
        return p.beta * s;
    }
};

RegParams coupled() {
    RegParams p;
    p[0] = {0.7, 0.3, 2.0, 0.05};
    p[1] = {1.3, 0.4, 5.0, 0.08};
    return p;
}

JointState random_state(const GridGeometry& g, std::mt19937_64& rng) {
    return {test::random_field(g, rng, 0.0, 2.0), test::random_field(g, rng, 0.0, 1.0),
            test::random_field(g, rng, 0.005, 0.05), test::random_field(g, rng, 0.0, 1.0)};
}

// Quadratic stand-in fidelity: sum (u - c)^2.
struct QuadFidelity final : Fidelity {
    double c;
    explicit QuadFidelity(double c_) : c(c_) {}
    double value(const ScalarField& u) override {
        double s = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) s += (u[k] - c) * (u[k] - c);
        return s;
    }
    ScalarField gradient(const ScalarField& u) override {
        ScalarField g(u.geometry());
        for (std::size_t k = 0; k < u.size(); ++k) g[k] = 2.0 * (u[k] - c);
        return g;
    }
};

}  // namespace

TEST_CASE("regularisers match the loop oracle on random 8x8 states") {
    GridGeometry g = test::small_grid(8);
    std::mt19937_64 rng(21);
    QuadFidelity f1(1.0), f2(0.01);
    const RegParams p = coupled();
    JointObjective obj(g, &f1, &f2, p);
    const Oracle o{g};
    for (int trial = 0; trial < 20; ++trial) {
        const JointState s = random_state(g, rng);
        const TermBreakdown t = obj.eval(s);
        CHECK(std::abs(t.smooth[0] - o.smooth(p[0], s.u1, s.v1)) <= 1e-12 * std::abs(t.smooth[0]));
        CHECK(std::abs(t.smooth[1] - o.smooth(p[1], s.u2, s.v2)) <= 1e-12 * std::abs(t.smooth[1]));
        CHECK(std::abs(t.edge[0] - o.edge(p[0], s.v1, s.v2)) <= 1e-12 * std::abs(t.edge[0]));
        CHECK(std::abs(t.edge[1] - o.edge(p[1], s.v2, s.v1)) <= 1e-12 * std::abs(t.edge[1]));
        CHECK(t.fidelity[0] == f1.value(s.u1));
        CHECK(t.total() == t.slot_total(0) + t.slot_total(1));
    }
}

TEST_CASE("edge term at v = 0 equals beta |Omega| / (4 eps)") {
    GridGeometry g = test::small_grid(10);
    QuadFidelity f(0.0);
    const RegParams p = coupled();
    JointObjective obj(g, &f, &f, p);
    const ScalarField zero(g, 0.0);
    const double area = g.nx * g.ny * g.pixel_area();
    CHECK(obj.edge(0, zero, zero) == doctest::Approx(p[0].beta * area / (4.0 * p[0].eps)).epsilon(1e-14));
    // v = 1 with no gradient costs nothing
    CHECK(obj.edge(0, ScalarField(g, 1.0), ScalarField(g, 1.0)) == 0.0);
}

TEST_CASE("swapping the modalities swaps the term breakdown") {
    GridGeometry g = test::small_grid(9);
    std::mt19937_64 rng(8);
    QuadFidelity fa(0.5), fb(0.02);
    RegParams p = coupled();
    RegParams q;
    q[0] = p[1];
    q[1] = p[0];
    JointObjective a(g, &fa, &fb, p), b(g, &fb, &fa, q);
    const JointState s = random_state(g, rng);
    const JointState t{s.u2, s.v2, s.u1, s.v1};
    const TermBreakdown ta = a.eval(s), tb = b.eval(t);
    for (int i = 0; i < 2; ++i) {
        CHECK(ta.fidelity[i] == tb.fidelity[1 - i]);
        CHECK(ta.smooth[i] == doctest::Approx(tb.smooth[1 - i]).epsilon(1e-14));
        CHECK(ta.edge[i] == doctest::Approx(tb.edge[1 - i]).epsilon(1e-14));
    }
}

TEST_CASE("with both couplings zero each slot ignores the other modality") {
    GridGeometry g = test::small_grid(9);
    std::mt19937_64 rng(3);
    QuadFidelity f1(1.0), f2(0.02);
    RegParams p = coupled();
    p[0].gamma = p[1].gamma = 0.0;
    JointObjective obj(g, &f1, &f2, p);
    JointState s = random_state(g, rng);
    const TermBreakdown before = obj.eval(s);
    const ScalarField gv1 = obj.grad_v(0, s);
    s.u2 = test::random_field(g, rng, 0.005, 0.05);
    s.v2 = test::random_field(g, rng, 0.0, 1.0);
    const TermBreakdown after = obj.eval(s);
    CHECK(after.slot_total(0) == before.slot_total(0));
    CHECK(obj.grad_v(0, s) == gv1);
}

TEST_CASE("analytic block gradients match central differences") {
    GridGeometry g = test::small_grid(8);
    std::mt19937_64 rng(17);
    QuadFidelity f1(1.0), f2(0.02);
    JointObjective obj(g, &f1, &f2, coupled());
    JointState s = random_state(g, rng);
    const auto check_block = [&](auto get, const ScalarField& grad) {
        for (std::size_t k = 0; k < g.size(); k += 5) {
            ScalarField& f = get(s);
            const double x0 = f[k], step = 1e-5;
            f[k] = x0 + step;
            const double fp = obj.eval(s).total();
            f[k] = x0 - step;
            const double fm = obj.eval(s).total();
            f[k] = x0;
            CHECK(std::abs((fp - fm) / (2.0 * step) - grad[k]) <= 1e-6 * std::max(1.0, std::abs(grad[k])));
        }
    };
    check_block([](JointState& t) -> ScalarField& { return t.u1; }, obj.grad_u(0, s));
    check_block([](JointState& t) -> ScalarField& { return t.u2; }, obj.grad_u(1, s));
    check_block([](JointState& t) -> ScalarField& { return t.v1; }, obj.grad_v(0, s));
    check_block([](JointState& t) -> ScalarField& { return t.v2; }, obj.grad_v(1, s));
}

TEST_CASE("parameter validation") {
    RegParams p = coupled();
    CHECK_NOTHROW(p.validate());
    p[0].gamma = 11.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = coupled();
    p[1].eps = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = coupled();
    p[1].gamma = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("states on another grid are rejected") {
    GridGeometry g = test::small_grid(8);
    QuadFidelity f(0.0);
    JointObjective obj(g, &f, &f, coupled());
    const ScalarField a(g), b(test::small_grid(9));
    CHECK_THROWS_AS(obj.eval(JointState{a, a, b, a}), GeometryMismatch);
}

TEST_CASE("term breakdown serialises on one line") {
    TermBreakdown t;
    t.fidelity = {1.5, 2.0};
    const std::string j = t.to_json();
    CHECK(j.find('\n') == std::string::npos);
    CHECK(j.find("\"total\":3.5") != std::string::npos);
}
