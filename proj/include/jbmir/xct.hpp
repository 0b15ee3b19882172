#pragma once

#include <cstdint>
#include <vector>

#include "jbmir/grid.hpp"
#include "jbmir/kernels.hpp"

namespace jbmir {

/// Parallel-beam scan. View k has line normal angle k * pi / n_views; ray m sits at
/// signed offset (m - (n_rays-1)/2) * ray_spacing from the grid center.
struct ScanGeometry {
    int n_views = 30;
    int n_rays = 100;
    double ray_spacing = 0.5;   // mm
    double sample_step = 0.25;  // mm, along each ray

    double angle(int view) const;   // radians
    double offset(int ray) const;   // mm
    std::size_t size() const { return static_cast<std::size_t>(n_views) * static_cast<std::size_t>(n_rays); }
    void validate() const;
    bool operator==(const ScanGeometry&) const = default;
};

/// Line integrals, n_views rows by n_rays columns.
struct Sinogram {
    ScanGeometry scan;
    std::vector<double> values;

    Sinogram() = default;
    explicit Sinogram(const ScanGeometry& s, double fill = 0.0) : scan(s), values(s.size(), fill) {}
    double& at(int view, int ray) { return values[static_cast<std::size_t>(view) * scan.n_rays + ray]; }
    double at(int view, int ray) const { return values[static_cast<std::size_t>(view) * scan.n_rays + ray]; }
};

/// Row-compressed sparse matrix with 32-bit column indices.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> col_idx;
    std::vector<double> vals;

    kernels::CsrView view() const { return {rows, row_ptr.data(), col_idx.data(), vals.data()}; }
    CsrMatrix transposed() const;
};

/// Discretised Radon transform: bilinear sampling of the image at `sample_step`
/// along each ray, each sample weighted by the step length. Samples falling
/// outside the grid see zero. The adjoint applies the stored transpose, so
/// <R u, g> = <u, R^T g> up to rounding.
class RadonOperator {
public:
    RadonOperator(const GridGeometry& grid, const ScanGeometry& scan);

    const GridGeometry& grid() const { return grid_; }
    const ScanGeometry& scan() const { return scan_; }
    const CsrMatrix& matrix() const { return fwd_; }

    Sinogram forward(const ScalarField& u) const;
    ScalarField adjoint(const Sinogram& g) const;
    void forward(const double* u, double* out) const;
    void adjoint(const double* g, double* out) const;

private:
    GridGeometry grid_;
    ScanGeometry scan_;
    CsrMatrix fwd_;
    CsrMatrix adj_;
};

Sinogram radon_forward(const ScalarField& u, const ScanGeometry& scan);
ScalarField radon_adjoint(const Sinogram& g, const ScanGeometry& scan, const GridGeometry& target);

}  // namespace jbmir
