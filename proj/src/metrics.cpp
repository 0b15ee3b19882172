#include "jbmir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jbmir/errors.hpp"

namespace jbmir {

SsimReport ssim_report(const ScalarField& rec, const ScalarField& truth, const SsimParams& p) {
    require_same_geometry(rec.geometry(), truth.geometry(), "ssim");
    const GridGeometry& g = truth.geometry();
    std::vector<std::size_t> idx;
    idx.reserve(g.size());
    if (p.domain == SsimDomain::disk) {
        const ScalarField mask = disk_mask(g);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (mask[k] != 0.0) idx.push_back(k);
    } else {
        for (std::size_t k = 0; k < g.size(); ++k) idx.push_back(k);
    }
    if (idx.empty()) throw GeometryMismatch("ssim: empty evaluation domain");

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    double mt = 0.0, mr = 0.0;
    for (std::size_t k : idx) {
        lo = std::min(lo, truth[k]);
        hi = std::max(hi, truth[k]);
        mt += truth[k];
        mr += rec[k];
    }
    const double n = static_cast<double>(idx.size());
    mt /= n;
    mr /= n;
    double vt = 0.0, vr = 0.0, cov = 0.0;
    for (std::size_t k : idx) {
        const double a = truth[k] - mt;
        const double b = rec[k] - mr;
        vt += a * a;
        vr += b * b;
        cov += a * b;
    }
    vt /= n;
    vr /= n;
    cov /= n;

    SsimReport r;
    r.pixels = idx.size();
    r.L = p.dynamic_range ? *p.dynamic_range : (hi > lo ? hi - lo : p.fallback_range);
    r.c1 = (p.k1 * r.L) * (p.k1 * r.L);
    r.c2 = (p.k2 * r.L) * (p.k2 * r.L);
    r.value = ((2.0 * mt * mr + r.c1) * (2.0 * cov + r.c2)) / ((mt * mt + mr * mr + r.c1) * (vt + vr + r.c2));
    return r;
}

std::vector<ProfilePoint> line_profile(const ScalarField& u, double column_x) {
    const GridGeometry& g = u.geometry();
    const double left = g.x_of(0) - 0.5 * g.h;
    const double right = g.x_of(g.nx - 1) + 0.5 * g.h;
    if (!(column_x >= left && column_x <= right)) throw GeometryMismatch("line_profile: column outside the grid");
    int col = static_cast<int>(std::lround((column_x - g.center_x) / g.h + 0.5 * (g.nx - 1)));
    col = std::clamp(col, 0, g.nx - 1);
    std::vector<ProfilePoint> out(static_cast<std::size_t>(g.ny));
    for (int row = 0; row < g.ny; ++row) out[static_cast<std::size_t>(row)] = {g.y_of(row), u.at(row, col)};
    return out;
}

double region_mean(const ScalarField& u, const std::vector<unsigned char>& mask) {
    if (mask.size() != u.size()) throw GeometryMismatch("region_mean: mask size differs from the field");
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (mask[k]) {
            s += u[k];
            ++n;
        }
    if (n == 0) throw GeometryMismatch("region_mean: empty region");
    return s / static_cast<double>(n);
}

}  // namespace jbmir
