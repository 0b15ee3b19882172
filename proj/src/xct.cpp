#include "jbmir/xct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jbmir/errors.hpp"

namespace jbmir {

double ScanGeometry::angle(int view) const { return view * std::numbers::pi / n_views; }

double ScanGeometry::offset(int ray) const { return (ray - 0.5 * (n_rays - 1)) * ray_spacing; }

void ScanGeometry::validate() const {
    if (n_views <= 0 || n_rays <= 0) throw ConfigError("scan: n_views and n_rays must be positive");
    if (!(ray_spacing > 0.0) || !(sample_step > 0.0))
        throw ConfigError("scan: ray_spacing and sample_step must be positive");
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(cols + 1, 0);
    for (auto c : col_idx) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
    for (std::size_t c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
    t.col_idx.resize(col_idx.size());
    t.vals.resize(vals.size());
    std::vector<std::int64_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    // rows visited in order, so each transposed row lists its columns ascending
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::int64_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            const auto dst = cursor[static_cast<std::size_t>(col_idx[p])]++;
            t.col_idx[dst] = static_cast<std::int32_t>(r);
            t.vals[dst] = vals[p];
        }
    }
    return t;
}

RadonOperator::RadonOperator(const GridGeometry& grid, const ScanGeometry& scan) : grid_(grid), scan_(scan) {
    grid_.validate();
    scan_.validate();
    const int nx = grid_.nx;
    const int ny = grid_.ny;
    const double h = grid_.h;
    const double half_extent = 0.5 * std::hypot(nx * h, ny * h) + h;
    const auto n_samples = static_cast<int>(std::ceil(2.0 * half_extent / scan_.sample_step)) + 1;
    const double step = scan_.sample_step;

    fwd_.rows = scan_.size();
    fwd_.cols = grid_.size();
    fwd_.row_ptr.assign(1, 0);

    std::vector<double> scratch(grid_.size(), 0.0);
    std::vector<std::int32_t> touched;
    auto deposit = [&](int r, int c, double w) {
        if (r < 0 || r >= ny || c < 0 || c >= nx || w == 0.0) return;
        const auto k = static_cast<std::int32_t>(grid_.index(r, c));
        if (scratch[k] == 0.0) touched.push_back(k);
        scratch[k] += w;
    };

    for (int v = 0; v < scan_.n_views; ++v) {
        const double theta = scan_.angle(v);
        const double ct = std::cos(theta);
        const double st = std::sin(theta);
        for (int m = 0; m < scan_.n_rays; ++m) {
            const double s = scan_.offset(m);
            for (int j = 0; j < n_samples; ++j) {
                const double t = (j - 0.5 * (n_samples - 1)) * step;
                const double x = s * ct - t * st;
                const double y = s * st + t * ct;
                const double colf = x / h + 0.5 * (nx - 1);
                const double rowf = 0.5 * (ny - 1) - y / h;
                if (colf <= -1.0 || colf >= nx || rowf <= -1.0 || rowf >= ny) continue;
                const int c0 = static_cast<int>(std::floor(colf));
                const int r0 = static_cast<int>(std::floor(rowf));
                const double fx = colf - c0;
                const double fy = rowf - r0;
                deposit(r0, c0, step * (1.0 - fx) * (1.0 - fy));
                deposit(r0, c0 + 1, step * fx * (1.0 - fy));
                deposit(r0 + 1, c0, step * (1.0 - fx) * fy);
                deposit(r0 + 1, c0 + 1, step * fx * fy);
            }
            std::sort(touched.begin(), touched.end());
            for (auto k : touched) {
                fwd_.col_idx.push_back(k);
                fwd_.vals.push_back(scratch[k]);
                scratch[k] = 0.0;
            }
            touched.clear();
            fwd_.row_ptr.push_back(static_cast<std::int64_t>(fwd_.col_idx.size()));
        }
    }
    adj_ = fwd_.transposed();
}

void RadonOperator::forward(const double* u, double* out) const { kernels::active().spmv(fwd_.view(), u, out); }

void RadonOperator::adjoint(const double* g, double* out) const { kernels::active().spmv(adj_.view(), g, out); }

Sinogram RadonOperator::forward(const ScalarField& u) const {
    require_same_geometry(u.geometry(), grid_, "radon_forward");
    Sinogram out(scan_);
    forward(u.data(), out.values.data());
    return out;
}

ScalarField RadonOperator::adjoint(const Sinogram& g) const {
    if (!(g.scan == scan_)) throw GeometryMismatch("radon_adjoint: sinogram scan geometry differs from operator");
    ScalarField out(grid_);
    adjoint(g.values.data(), out.data());
    return out;
}

Sinogram radon_forward(const ScalarField& u, const ScanGeometry& scan) {
    return RadonOperator(u.geometry(), scan).forward(u);
}

ScalarField radon_adjoint(const Sinogram& g, const ScanGeometry& scan, const GridGeometry& target) {
    return RadonOperator(target, scan).adjoint(g);
}

}  // namespace jbmir
