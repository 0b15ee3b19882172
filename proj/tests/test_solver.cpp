#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "jbmir/errors.hpp"
#include "jbmir/phantom.hpp"
#include "jbmir/solver.hpp"
#include "test_util.hpp"

using namespace jbmir;

namespace {

GridGeometry unit_cell(int n) {
    GridGeometry g;
    g.nx = n;
    g.ny = 1;
    g.h = 1.0;
    g.disk_radius = 0.5;
    return g;
}

double sum_sq(const ScalarField& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * x[k];
    return s;
}

ScalarField twice(const ScalarField& x) {
    ScalarField g(x.geometry());
    for (std::size_t k = 0; k < x.size(); ++k) g[k] = 2.0 * x[k];
    return g;
}

struct Tiny {
    ReconstructionSetup setup;
    Sinogram g1;
    BoundaryData g2;
    RegParams params;
};

Tiny tiny_problem() {
    Tiny t;
    t.setup.grid = test::small_grid(24);
    t.setup.scan = ScanGeometry{10, 30, 50.0 / 30, 1.0};
    t.setup.optics.n_sources = 8;
    t.setup.optics.n_detectors = 8;
    t.setup.optics.source_width = 4.0;
    t.setup.optics.detector_width = 3.0;
    t.setup.diffusion = DiffusionModel::uniform(t.setup.grid, 0.3);
    t.setup.schedule = ScheduleParams{3, 3, 5, 3};
    const PhantomPair p = builtin_phantom("phantom1");
    const ScalarField u1 = rasterize(p, t.setup.grid, Modality::xct);
    const ScalarField u2 = rasterize(p, t.setup.grid, Modality::dot);
    t.g1 = add_noise(RadonOperator(t.setup.grid, t.setup.scan).forward(u1), 0.05, 1);
    DotOperator op(t.setup.grid, t.setup.optics, t.setup.diffusion);
    t.g2 = add_noise(op.forward(u2), 0.02, 2);
    t.params[0] = {10.0, 0.01, 5.0, 0.1};
    t.params[1] = {1e3, 1e-4, 5.0, 0.1};
    return t;
}

}  // namespace

TEST_CASE("f(x) = x^2 from x = 1 with t0 = 1 accepts t = 0.5") {
    const GridGeometry g = unit_cell(1);
    const ScalarField x(g, 1.0);
    const StepResult r = backtracking_step(sum_sq, x, 1.0, twice(x), 1.0, Bounds{}, LineSearchParams{});
    CHECK(r.status == StepStatus::accepted);
    CHECK(r.t == 0.5);
    CHECK(r.x[0] == 0.0);
    CHECK(r.value == 0.0);
    CHECK(r.backtracks == 1);
}

TEST_CASE("accepted steps satisfy the sufficient-decrease condition and respect the bounds") {
    const GridGeometry g = unit_cell(5);
    ScalarField x(g);
    for (int k = 0; k < 5; ++k) x[k] = 0.2 * k - 0.3;
    const Bounds b{0.0, 0.5};
    const LineSearchParams ls;
    const ScalarField grad = twice(x);
    const StepResult r = backtracking_step(sum_sq, x, sum_sq(x), grad, 4.0, b, ls);
    REQUIRE(r.status == StepStatus::accepted);
    double decrease = 0.0;
    for (int k = 0; k < 5; ++k) {
        CHECK(r.x[k] >= 0.0);
        CHECK(r.x[k] <= 0.5);
        decrease += grad[k] * (x[k] - r.x[k]);
    }
    CHECK(r.value <= sum_sq(x) - ls.c * decrease);
}

TEST_CASE("a point pinned against its bound by the gradient is converged") {
    const GridGeometry g = unit_cell(3);
    const ScalarField x(g, 0.0);
    ScalarField grad(g, 1.0);
    const StepResult r = backtracking_step([](const ScalarField&) { return 0.0; }, x, 0.0, grad, 1.0,
                                           Bounds{0.0, 1.0}, LineSearchParams{});
    CHECK(r.status == StepStatus::converged);
    CHECK(r.x == x);
    const StepResult z = backtracking_step(sum_sq, x, 0.0, ScalarField(g, 0.0), 1.0, Bounds{}, LineSearchParams{});
    CHECK(z.status == StepStatus::converged);
}

TEST_CASE("no admissible decrease within the backtracking budget stalls") {
    const GridGeometry g = unit_cell(2);
    const ScalarField x(g, 1.0);
    LineSearchParams ls;
    ls.max_backtracks = 3;
    int calls = 0;
    const StepResult r = backtracking_step([&](const ScalarField&) { ++calls; return 5.0; }, x, 1.0, twice(x), 1.0,
                                           Bounds{}, ls);
    CHECK(r.status == StepStatus::stalled);
    CHECK(r.x == x);
    CHECK(calls == 4);
}

TEST_CASE("non-finite objective or gradient raises a numerical error") {
    const GridGeometry g = unit_cell(2);
    const ScalarField x(g, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(backtracking_step(sum_sq, x, inf, twice(x), 1.0, Bounds{}, LineSearchParams{}), NumericalError);
    ScalarField bad = twice(x);
    bad[0] = std::nan("");
    CHECK_THROWS_AS(backtracking_step(sum_sq, x, 2.0, bad, 1.0, Bounds{}, LineSearchParams{}), NumericalError);
    CHECK_THROWS_AS(backtracking_step([](const ScalarField&) { return std::nan(""); }, x, 2.0, twice(x), 1.0,
                                      Bounds{}, LineSearchParams{}),
                    NumericalError);
}

TEST_CASE("line-search and schedule parameters are validated") {
    LineSearchParams ls;
    ls.rho = 1.0;
    CHECK_THROWS_AS(ls.validate(), ConfigError);
    ls = {};
    ls.c = 0.0;
    CHECK_THROWS_AS(ls.validate(), ConfigError);
    ScheduleParams s;
    s.inner = -1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("joint reconstruction never increases the logged objective and keeps the bounds") {
    const Tiny t = tiny_problem();
    const JbmirResult res = jbmir::jbmir(t.setup, t.g1, t.g2, t.params);
    double prev = std::numeric_limits<double>::infinity();
    int accepted = 0;
    for (const auto& r : res.log.records) {
        if (r.outer < 0) continue;
        CHECK(r.terms.total() <= prev);
        prev = r.terms.total();
        accepted += r.status == StepStatus::accepted;
    }
    CHECK(accepted > 10);
    for (std::size_t k = 0; k < t.setup.grid.size(); ++k) {
        CHECK(res.state.u2[k] >= t.setup.diffusion.mu_a_floor);
        CHECK(res.state.v1[k] >= 0.0);
        CHECK(res.state.v1[k] <= 1.0);
        CHECK(res.state.v2[k] >= 0.0);
        CHECK(res.state.v2[k] <= 1.0);
    }
}

TEST_CASE("with zero coupling the joint run reproduces the two separate runs bit for bit") {
    Tiny t = tiny_problem();
    t.params[0].gamma = t.params[1].gamma = 0.0;
    const JbmirResult joint = jbmir::jbmir(t.setup, t.g1, t.g2, t.params);
    const SmirResult x = smir_xct(t.setup, t.g1, t.params[0]);
    const SmirResult d = smir_dot(t.setup, t.g2, t.params[1]);
    CHECK(joint.state.u1 == x.u);
    CHECK(joint.state.v1 == x.v);
    CHECK(joint.state.u2 == d.u);
    CHECK(joint.state.v2 == d.v);
}

TEST_CASE("run log is one JSON object per step") {
    const Tiny t = tiny_problem();
    const SmirResult res = smir_xct(t.setup, t.g1, t.params[0]);
    std::ostringstream out;
    res.log.write_jsonl(out);
    std::istringstream in(out.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("outer"));
        CHECK(j.contains("block"));
        CHECK(j.contains("t"));
        CHECK(j.at("terms").contains("total"));
        ++n;
    }
    CHECK(n == res.log.records.size());
}

TEST_CASE("DOT initialisation logs warm-start and edge stages before outer iteration 0") {
    const Tiny t = tiny_problem();
    DotOperator op(t.setup.grid, t.setup.optics, t.setup.diffusion);
    RunLog log;
    const auto [u, v] = init_dot(t.setup, op, t.g2, t.params[1], &log);
    REQUIRE(!log.records.empty());
    CHECK(log.records.front().block == Block::init_u2);
    CHECK(log.records.back().block == Block::init_v2);
    for (const auto& r : log.records) CHECK(r.outer == -1);
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(u[k] >= t.setup.diffusion.mu_a_floor);
}
