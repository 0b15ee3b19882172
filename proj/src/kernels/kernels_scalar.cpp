#include "jbmir/kernels.hpp"

#include <algorithm>

namespace jbmir::kernels {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

double sq_dist(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

void spmv(const CsrView& a, const double* x, double* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::int64_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.vals[p] * x[a.cols[p]];
        y[r] = s;
    }
}

double smooth_energy(const double* gx, const double* gy, const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
        s += (v[k] * v[k]) * g2;
    }
    return s;
}

double edge_energy(const double* gx, const double* gy, const double* v, const double* vo, double eps,
                   double gamma, std::size_t n) {
    const double inv4eps = 1.0 / (4.0 * eps);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
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
    for (std::size_t k = 0; k < n; ++k) {
        ox[k] = w[k] * gx[k];
        oy[k] = w[k] * gy[k];
    }
}

void projected_step(const double* x, const double* g, double t, double lo, double hi, double* out,
                    std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double trial = x[k] - t * g[k];
        out[k] = std::min(std::max(trial, lo), hi);
    }
}

void edge_grad_pointwise(const double* gx, const double* gy, const double* v, const double* vo, double eps,
                         double gamma, double* w, double* pt, std::size_t n) {
    const double inv4eps = 1.0 / (4.0 * eps);
    const double inv2eps = 1.0 / (2.0 * eps);
    for (std::size_t k = 0; k < n; ++k) {
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
    for (std::size_t k = 0; k < n; ++k) {
        const double g2 = gx[k] * gx[k] + gy[k] * gy[k];
        const double one_minus = 1.0 - vo[k];
        const double a = eps * g2 + one_minus * one_minus * inv4eps;
        out[k] += scale * (v[k] - vo[k]) * a;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        Isa::scalar,  &dot,       &sq_dist,        &spmv, &smooth_energy, &edge_energy, &scale_pair,
        &projected_step, &edge_grad_pointwise, &edge_cross_grad,
    };
    return table;
}

}  // namespace jbmir::kernels
