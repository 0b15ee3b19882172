#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace jbmir {

/// Pixel lattice over a square patch that contains the circular imaging domain.
///
/// Pixel (row, col) has its center at
///   x = center_x + (col - (nx-1)/2) * h,   y = center_y + ((ny-1)/2 - row) * h,
/// so row 0 is the top of the image. All lengths are in mm.
struct GridGeometry {
    int nx = 100;
    int ny = 100;
    double h = 0.5;
    double center_x = 0.0;
    double center_y = 0.0;
    double disk_radius = 25.0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(col);
    }
    double x_of(int col) const { return center_x + (col - 0.5 * (nx - 1)) * h; }
    double y_of(int row) const { return center_y + (0.5 * (ny - 1) - row) * h; }
    double pixel_area() const { return h * h; }

    /// Throws ConfigError when the lattice is empty or does not cover the disk.
    void validate() const;

    bool operator==(const GridGeometry&) const = default;
};

enum class FieldUnit { per_mm, dimensionless };

enum class Modality { xct, dot };

/// Real-valued function on the pixel grid, row-major.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridGeometry& g, double fill = 0.0, FieldUnit unit = FieldUnit::per_mm);
    ScalarField(const GridGeometry& g, std::vector<double> values, FieldUnit unit = FieldUnit::per_mm);

    const GridGeometry& geometry() const { return geom_; }
    FieldUnit unit() const { return unit_; }
    void set_unit(FieldUnit u) { unit_ = u; }

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double& at(int row, int col) { return values_[geom_.index(row, col)]; }
    double at(int row, int col) const { return values_[geom_.index(row, col)]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::span<double> span() { return values_; }
    std::span<const double> span() const { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;
    bool operator==(const ScalarField& o) const { return geom_ == o.geom_ && values_ == o.values_; }

private:
    GridGeometry geom_{};
    std::vector<double> values_;
    FieldUnit unit_ = FieldUnit::per_mm;
};

struct VectorField {
    GridGeometry geometry;
    std::vector<double> x;
    std::vector<double> y;

    VectorField() = default;
    explicit VectorField(const GridGeometry& g) : geometry(g), x(g.size(), 0.0), y(g.size(), 0.0) {}
    std::size_t size() const { return x.size(); }
};

/// Forward differences divided by h; the component across the last column (row) is zero.
VectorField forward_gradient(const ScalarField& f);
void forward_gradient(const GridGeometry& g, const double* f, double* gx, double* gy);

/// Backward-difference divergence, the exact negative adjoint of forward_gradient.
ScalarField backward_divergence(const VectorField& p);
void backward_divergence(const GridGeometry& g, const double* px, const double* py, double* out);

/// 1 where the pixel center lies within disk_radius of the grid center, else 0.
ScalarField disk_mask(const GridGeometry& g);

/// Euclidean inner product of the raw value arrays.
double inner(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

}  // namespace jbmir
