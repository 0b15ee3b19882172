#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jbmir/dot.hpp"
#include "jbmir/grid.hpp"
#include "jbmir/xct.hpp"

namespace jbmir {

enum class ShapeKind { circle, ellipse };

/// A region of constant coefficient. For circles semi_a is the radius and semi_b is ignored.
/// An absent per-modality value means the shape does not exist in that modality.
struct ShapeSpec {
    std::string name;
    ShapeKind kind = ShapeKind::circle;
    double cx = 0.0;  // mm, relative to the grid center
    double cy = 0.0;
    double semi_a = 1.0;
    double semi_b = 1.0;
    double rotation = 0.0;  // degrees, counter-clockwise
    std::optional<double> xct;
    std::optional<double> dot;

    bool contains(double x, double y) const;
    std::optional<double> value(Modality m) const { return m == Modality::xct ? xct : dot; }
    /// Largest distance of the shape from its own center.
    double extent() const;
};

struct PhantomPair {
    std::string name;
    double xct_background = 1.0;
    double dot_background = 0.01;
    std::vector<ShapeSpec> shapes;  // later shapes are drawn on top

    /// Throws ConfigError when a shape leaves the disk or a value is not positive.
    void validate(double disk_radius) const;
    /// Throws ConfigError for an unknown name.
    const ShapeSpec& shape(const std::string& name) const;
};

/// Built-ins `phantom1`, `phantom2`, `phantom3`; throws ConfigError otherwise.
PhantomPair builtin_phantom(const std::string& name);

/// Background inside the disk, shape values by pixel-center membership, 0 (XCT) or
/// dot_floor (DOT) outside the disk.
ScalarField rasterize(const PhantomPair& p, const GridGeometry& g, Modality m, double dot_floor = 1e-6);

/// 1 for in-disk pixels whose centers lie inside the shape.
std::vector<unsigned char> shape_mask(const ShapeSpec& s, const GridGeometry& g);

Sinogram add_noise(const Sinogram& data, double eta, std::uint64_t seed);
BoundaryData add_noise(const BoundaryData& data, double eta, std::uint64_t seed);

}  // namespace jbmir
