#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "jbmir/kernels.hpp"

using namespace jbmir::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double reduction_tol(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] * b[k]);
    return 1e-13 * (s + 1.0);
}

}  // namespace

TEST_CASE("AVX2 kernels agree with the scalar reference") {
    const KernelTable* avx = avx2_table();
    if (!avx || !cpu_has_avx2()) {
        MESSAGE("AVX2 unavailable; equivalence not exercised");
        return;
    }
    const KernelTable& sc = scalar_table();
    CHECK(sc.isa == Isa::scalar);
    CHECK(avx->isa == Isa::avx2);
    std::mt19937_64 rng(11);
    // odd lengths exercise the scalar tails of the vector loops
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 17u, 64u, 1001u}) {
        CAPTURE(n);
        const auto a = random_vec(rng, n, -2.0, 2.0);
        const auto b = random_vec(rng, n, -2.0, 2.0);
        const auto v = random_vec(rng, n, 0.0, 1.0);
        const auto vo = random_vec(rng, n, 0.0, 1.0);

        CHECK(std::abs(sc.dot(a.data(), b.data(), n) - avx->dot(a.data(), b.data(), n)) <= reduction_tol(a, b));
        CHECK(std::abs(sc.sq_dist(a.data(), b.data(), n) - avx->sq_dist(a.data(), b.data(), n)) <=
              1e-13 * (4.0 * 4.0 * n + 1.0));
        const double se = sc.smooth_energy(a.data(), b.data(), v.data(), n);
        CHECK(std::abs(se - avx->smooth_energy(a.data(), b.data(), v.data(), n)) <= 1e-13 * (std::abs(se) + 1.0));
        for (const double* other : {static_cast<const double*>(nullptr), vo.data()}) {
            const double ee = sc.edge_energy(a.data(), b.data(), v.data(), other, 1e-2, 3.0, n);
            CHECK(std::abs(ee - avx->edge_energy(a.data(), b.data(), v.data(), other, 1e-2, 3.0, n)) <=
                  1e-13 * (std::abs(ee) + 1.0));

            std::vector<double> w1(n), p1(n), w2(n), p2(n);
            sc.edge_grad_pointwise(a.data(), b.data(), v.data(), other, 1e-2, 3.0, w1.data(), p1.data(), n);
            avx->edge_grad_pointwise(a.data(), b.data(), v.data(), other, 1e-2, 3.0, w2.data(), p2.data(), n);
            CHECK(w1 == w2);
            CHECK(p1 == p2);
        }

        std::vector<double> ox1(n), oy1(n), ox2(n), oy2(n);
        sc.scale_pair(v.data(), a.data(), b.data(), ox1.data(), oy1.data(), n);
        avx->scale_pair(v.data(), a.data(), b.data(), ox2.data(), oy2.data(), n);
        CHECK(ox1 == ox2);
        CHECK(oy1 == oy2);

        std::vector<double> s1(n), s2(n);
        sc.projected_step(a.data(), b.data(), 0.3, -1.0, 1.0, s1.data(), n);
        avx->projected_step(a.data(), b.data(), 0.3, -1.0, 1.0, s2.data(), n);
        CHECK(s1 == s2);
        for (double x : s1) CHECK((x >= -1.0 && x <= 1.0));

        std::vector<double> c1(a), c2(a);
        sc.edge_cross_grad(a.data(), b.data(), vo.data(), v.data(), 1e-2, 0.7, c1.data(), n);
        avx->edge_cross_grad(a.data(), b.data(), vo.data(), v.data(), 1e-2, 0.7, c2.data(), n);
        CHECK(c1 == c2);
    }
}

TEST_CASE("sparse matrix-vector product matches a dense oracle in both variants") {
    std::mt19937_64 rng(5);
    const std::size_t rows = 37, cols = 23;
    std::vector<double> dense(rows * cols, 0.0);
    std::vector<std::int64_t> ptr{0};
    std::vector<std::int32_t> idx;
    std::vector<double> vals;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c)
            if (u(rng) < 0.3) {
                const double val = u(rng) - 0.5;
                dense[r * cols + c] = val;
                idx.push_back(static_cast<std::int32_t>(c));
                vals.push_back(val);
            }
        ptr.push_back(static_cast<std::int64_t>(idx.size()));
    }
    const CsrView view{rows, ptr.data(), idx.data(), vals.data()};
    const auto x = random_vec(rng, cols, -1.0, 1.0);
    std::vector<double> expect(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) expect[r] += dense[r * cols + c] * x[c];

    std::vector<const KernelTable*> tables{&scalar_table()};
    if (avx2_table() && cpu_has_avx2()) tables.push_back(avx2_table());
    for (const KernelTable* t : tables) {
        std::vector<double> y(rows);
        t->spmv(view, x.data(), y.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(y[r] - expect[r]) < 1e-14);
    }
}

TEST_CASE("force pins the active table") {
    force(Isa::scalar);
    CHECK(active().isa == Isa::scalar);
    if (cpu_has_avx2()) {
        force(Isa::avx2);
        CHECK(active().isa == Isa::avx2);
    } else {
        CHECK_THROWS(force(Isa::avx2));
    }
    CHECK(std::string(name(Isa::avx2)) == "avx2");
}
