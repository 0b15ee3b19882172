// AVX2 variants of the kernels in kernels_scalar.cpp.
// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
// Elementwise kernels use the same operation order as the scalar reference
// (no fused multiply-add) so their outputs are bit-identical.

#include "jbmir/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace jbmir::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
    }
    for (; k + 4 <= n; k += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) s += a[k] * b[k];
    return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < n; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

void spmv(const CsrView& a, const double* x, double* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        std::int64_t p = a.row_ptr[r];
        const std::int64_t end = a.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; p + 4 <= end; p += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.cols + p));
            const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.vals + p), xv, acc);
        }
        double s = hsum(acc);
        for (; p < end; ++p) s += a.vals[p] * x[a.cols[p]];
        y[r] = s;
    }
}

double smooth_energy(const double* gx, const double* gy, const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d x = _mm256_loadu_pd(gx + k);
        const __m256d y = _mm256_loadu_pd(gy + k);
        const __m256d vv = _mm256_loadu_pd(v + k);
        const __m256d g2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
        acc = _mm256_fmadd_pd(_mm256_mul_pd(vv, vv), g2, acc);
    }
    double s = hsum(acc);
    for (; k < n; ++k) {
        const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
        s += (v[k] * v[k]) * g2;
    }
    return s;
}

double edge_energy(const double* gx, const double* gy, const double* v, const double* vo, double eps,
                   double gamma, std::size_t n) {
    const double inv4eps = 1.0 / (4.0 * eps);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vinv = _mm256_set1_pd(inv4eps);
    const __m256d vgam = _mm256_set1_pd(gamma);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d x = _mm256_loadu_pd(gx + k);
        const __m256d y = _mm256_loadu_pd(gy + k);
        const __m256d vv = _mm256_loadu_pd(v + k);
        const __m256d g2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
        const __m256d om = _mm256_sub_pd(one, vv);
        const __m256d a = _mm256_add_pd(_mm256_mul_pd(veps, g2), _mm256_mul_pd(_mm256_mul_pd(om, om), vinv));
        if (vo) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(vo + k), vv);
            const __m256d w = _mm256_add_pd(one, _mm256_mul_pd(vgam, _mm256_mul_pd(d, d)));
            acc = _mm256_fmadd_pd(a, w, acc);
        } else {
            acc = _mm256_add_pd(acc, a);
        }
    }
    double s = hsum(acc);
    for (; k < n; ++k) {
        const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
        const double one_minus = 1.0 - v[k];
        const double a = eps * g2 + one_minus * one_minus * inv4eps;
        double w = 1.0;
        if (vo) {
            const double d = vo[k] - v[k];
            w = 1.0 + gamma * (d * d);
        }
        s += a * w;
    }
    return s;
}

void scale_pair(const double* w, const double* gx, const double* gy, double* ox, double* oy, std::size_t n) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d wv = _mm256_loadu_pd(w + k);
        _mm256_storeu_pd(ox + k, _mm256_mul_pd(wv, _mm256_loadu_pd(gx + k)));
        _mm256_storeu_pd(oy + k, _mm256_mul_pd(wv, _mm256_loadu_pd(gy + k)));
    }
    for (; k < n; ++k) {
        ox[k] = w[k] * gx[k];
        oy[k] = w[k] * gy[k];
    }
}

void projected_step(const double* x, const double* g, double t, double lo, double hi, double* out,
                    std::size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d trial = _mm256_sub_pd(_mm256_loadu_pd(x + k), _mm256_mul_pd(vt, _mm256_loadu_pd(g + k)));
        // max(trial, lo) then min(., hi), same selection rule as std::max/std::min for finite input
        _mm256_storeu_pd(out + k, _mm256_min_pd(_mm256_max_pd(trial, vlo), vhi));
    }
    for (; k < n; ++k) {
        const double trial = x[k] - t * g[k];
        out[k] = std::min(std::max(trial, lo), hi);
    }
}

void edge_grad_pointwise(const double* gx, const double* gy, const double* v, const double* vo, double eps,
                         double gamma, double* w, double* pt, std::size_t n) {
    const double inv4eps = 1.0 / (4.0 * eps);
    const double inv2eps = 1.0 / (2.0 * eps);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d v4 = _mm256_set1_pd(inv4eps);
    const __m256d v2 = _mm256_set1_pd(inv2eps);
    const __m256d vgam = _mm256_set1_pd(gamma);
    const __m256d two_gam = _mm256_set1_pd(2.0 * gamma);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d vv = _mm256_loadu_pd(v + k);
        const __m256d om = _mm256_sub_pd(one, vv);
        if (vo) {
            const __m256d x = _mm256_loadu_pd(gx + k);
            const __m256d y = _mm256_loadu_pd(gy + k);
            const __m256d g2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
            const __m256d a = _mm256_add_pd(_mm256_mul_pd(veps, g2), _mm256_mul_pd(_mm256_mul_pd(om, om), v4));
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(vo + k), vv);
            const __m256d wk = _mm256_add_pd(one, _mm256_mul_pd(vgam, _mm256_mul_pd(d, d)));
            _mm256_storeu_pd(w + k, wk);
            const __m256d first = _mm256_sub_pd(zero, _mm256_mul_pd(_mm256_mul_pd(wk, om), v2));
            _mm256_storeu_pd(pt + k, _mm256_sub_pd(first, _mm256_mul_pd(_mm256_mul_pd(two_gam, d), a)));
        } else {
            _mm256_storeu_pd(w + k, one);
            _mm256_storeu_pd(pt + k, _mm256_mul_pd(_mm256_sub_pd(zero, om), v2));
        }
    }
    for (; k < n; ++k) {
        const double one_minus = 1.0 - v[k];
        if (vo) {
            const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
            const double a = eps * g2 + one_minus * one_minus * inv4eps;
            const double d = vo[k] - v[k];
            const double wk = 1.0 + gamma * (d * d);
            w[k] = wk;
            pt[k] = -(wk * one_minus) * inv2eps - (2.0 * gamma * d) * a;
        } else {
            w[k] = 1.0;
            pt[k] = -one_minus * inv2eps;
        }
    }
}

void edge_cross_grad(const double* gx, const double* gy, const double* vo, const double* v, double eps,
                     double scale, double* out, std::size_t n) {
    const double inv4eps = 1.0 / (4.0 * eps);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d v4 = _mm256_set1_pd(inv4eps);
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d x = _mm256_loadu_pd(gx + k);
        const __m256d y = _mm256_loadu_pd(gy + k);
        const __m256d g2 = _mm256_add_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
        const __m256d ov = _mm256_loadu_pd(vo + k);
        const __m256d om = _mm256_sub_pd(one, ov);
        const __m256d a = _mm256_add_pd(_mm256_mul_pd(veps, g2), _mm256_mul_pd(_mm256_mul_pd(om, om), v4));
        const __m256d term = _mm256_mul_pd(_mm256_mul_pd(vs, _mm256_sub_pd(_mm256_loadu_pd(v + k), ov)), a);
        _mm256_storeu_pd(out + k, _mm256_add_pd(_mm256_loadu_pd(out + k), term));
    }
    for (; k < n; ++k) {
        const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
        const double one_minus = 1.0 - vo[k];
        const double a = eps * g2 + one_minus * one_minus * inv4eps;
        out[k] += scale * (v[k] - vo[k]) * a;
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{
        Isa::avx2,  &dot,       &sq_dist,        &spmv, &smooth_energy, &edge_energy, &scale_pair,
        &projected_step, &edge_grad_pointwise, &edge_cross_grad,
    };
    return &table;
}

}  // namespace jbmir::kernels
