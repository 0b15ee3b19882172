#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "jbmir/grid.hpp"

namespace jbmir {

enum class SsimDomain { disk, full };

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    std::optional<double> dynamic_range;  // overrides max - min of the truth
    double fallback_range = 1.0;          // used when the truth is constant over the domain
    SsimDomain domain = SsimDomain::disk;
};

struct SsimReport {
    double value = 0.0;
    double L = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    std::size_t pixels = 0;
};

/// Single-window SSIM from global means, population variances and covariance.
SsimReport ssim_report(const ScalarField& rec, const ScalarField& truth, const SsimParams& p = {});
inline double ssim_global(const ScalarField& rec, const ScalarField& truth, const SsimParams& p = {}) {
    return ssim_report(rec, truth, p).value;
}

struct ProfilePoint {
    double y = 0.0;  // mm
    double value = 0.0;
};

/// Values along the pixel column nearest to x = column_x, top row first.
/// Throws GeometryMismatch when column_x lies outside the grid.
std::vector<ProfilePoint> line_profile(const ScalarField& u, double column_x);

/// Mean of u over pixels where mask is nonzero.
double region_mean(const ScalarField& u, const std::vector<unsigned char>& mask);

}  // namespace jbmir
