#include "jbmir/grid.hpp"

#include <cmath>
#include <string>

#include "jbmir/errors.hpp"
#include "jbmir/kernels.hpp"

namespace jbmir {

void GridGeometry::validate() const {
    if (nx <= 0 || ny <= 0) throw ConfigError("grid: nx and ny must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid: h must be positive");
    if (!(disk_radius > 0.0)) throw ConfigError("grid: disk_radius must be positive");
    // small slack: 100 * 0.5 == 2 * 25 exactly, but user values may carry rounding
    const double slack = 1e-9 * disk_radius;
    if (nx * h + slack < 2.0 * disk_radius || ny * h + slack < 2.0 * disk_radius)
        throw ConfigError("grid: nx*h and ny*h must cover the disk diameter");
}

ScalarField::ScalarField(const GridGeometry& g, double fill, FieldUnit unit)
    : geom_(g), values_(g.size(), fill), unit_(unit) {}

ScalarField::ScalarField(const GridGeometry& g, std::vector<double> values, FieldUnit unit)
    : geom_(g), values_(std::move(values)), unit_(unit) {
    if (values_.size() != g.size())
        throw GeometryMismatch("ScalarField: value count " + std::to_string(values_.size()) +
                               " does not match grid size " + std::to_string(g.size()));
}

bool ScalarField::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

void forward_gradient(const GridGeometry& g, const double* f, double* gx, double* gy) {
    const double inv_h = 1.0 / g.h;
    const int nx = g.nx;
    const int ny = g.ny;
    for (int r = 0; r < ny; ++r) {
        const double* row = f + static_cast<std::size_t>(r) * nx;
        double* ox = gx + static_cast<std::size_t>(r) * nx;
        double* oy = gy + static_cast<std::size_t>(r) * nx;
        for (int c = 0; c + 1 < nx; ++c) ox[c] = (row[c + 1] - row[c]) * inv_h;
        ox[nx - 1] = 0.0;
        if (r + 1 < ny) {
            const double* below = row + nx;
            for (int c = 0; c < nx; ++c) oy[c] = (below[c] - row[c]) * inv_h;
        } else {
            for (int c = 0; c < nx; ++c) oy[c] = 0.0;
        }
    }
}

void backward_divergence(const GridGeometry& g, const double* px, const double* py, double* out) {
    const double inv_h = 1.0 / g.h;
    const int nx = g.nx;
    const int ny = g.ny;
    for (int r = 0; r < ny; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * nx;
        for (int c = 0; c < nx; ++c) {
            const std::size_t k = base + c;
            const double east = (c + 1 < nx) ? px[k] : 0.0;
            const double west = (c > 0) ? px[k - 1] : 0.0;
            const double south = (r + 1 < ny) ? py[k] : 0.0;
            const double north = (r > 0) ? py[k - nx] : 0.0;
            out[k] = ((east - west) + (south - north)) * inv_h;
        }
    }
}

VectorField forward_gradient(const ScalarField& f) {
    VectorField out(f.geometry());
    forward_gradient(f.geometry(), f.data(), out.x.data(), out.y.data());
    return out;
}

ScalarField backward_divergence(const VectorField& p) {
    ScalarField out(p.geometry);
    backward_divergence(p.geometry, p.x.data(), p.y.data(), out.data());
    return out;
}

ScalarField disk_mask(const GridGeometry& g) {
    ScalarField m(g, 0.0, FieldUnit::dimensionless);
    const double r2 = g.disk_radius * g.disk_radius;
    for (int r = 0; r < g.ny; ++r) {
        const double dy = g.y_of(r) - g.center_y;
        for (int c = 0; c < g.nx; ++c) {
            const double dx = g.x_of(c) - g.center_x;
            if (dx * dx + dy * dy <= r2) m.at(r, c) = 1.0;
        }
    }
    return m;
}

double inner(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw GeometryMismatch("inner: length mismatch");
    return kernels::active().dot(a.data(), b.data(), a.size());
}

double norm2(std::span<const double> a) { return std::sqrt(inner(a, a)); }

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
    if (!(a == b)) throw GeometryMismatch(std::string(what) + ": fields live on different grids");
}

}  // namespace jbmir
