#include "jbmir/phantom.hpp"

#include <cmath>
#include <numbers>

#include "jbmir/errors.hpp"
#include "jbmir/noise.hpp"

namespace jbmir {

bool ShapeSpec::contains(double x, double y) const {
    const double dx = x - cx;
    const double dy = y - cy;
    if (kind == ShapeKind::circle) return dx * dx + dy * dy <= semi_a * semi_a;
    const double th = rotation * std::numbers::pi / 180.0;
    const double c = std::cos(th);
    const double s = std::sin(th);
    const double xr = c * dx + s * dy;
    const double yr = -s * dx + c * dy;
    return (xr * xr) / (semi_a * semi_a) + (yr * yr) / (semi_b * semi_b) <= 1.0;
}

double ShapeSpec::extent() const { return kind == ShapeKind::circle ? semi_a : std::max(semi_a, semi_b); }

void PhantomPair::validate(double disk_radius) const {
    if (!(xct_background > 0.0) || !(dot_background > 0.0))
        throw ConfigError("phantom " + name + ": background values must be positive");
    for (const auto& s : shapes) {
        if (!(s.semi_a > 0.0) || (s.kind == ShapeKind::ellipse && !(s.semi_b > 0.0)))
            throw ConfigError("phantom " + name + ": shape " + s.name + " has a non-positive size");
        if (std::hypot(s.cx, s.cy) + s.extent() > disk_radius)
            throw ConfigError("phantom " + name + ": shape " + s.name + " leaves the imaging disk");
        if ((s.xct && !(*s.xct > 0.0)) || (s.dot && !(*s.dot > 0.0)))
            throw ConfigError("phantom " + name + ": shape " + s.name + " has a non-positive value");
    }
}

const ShapeSpec& PhantomPair::shape(const std::string& n) const {
    for (const auto& s : shapes)
        if (s.name == n) return s;
    throw ConfigError("phantom " + name + " has no shape named " + n);
}

namespace {

// Main inclusions: radius 6 mm, outer ones 15 mm from the origin.
constexpr double kMainRadius = 6.0;
constexpr double kRing = 15.0;
constexpr double kSmallRadius = 2.5;

ShapeSpec circle(std::string name, double angle_deg, double dist, double r, std::optional<double> xct,
                 std::optional<double> dot) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    ShapeSpec s;
    s.name = std::move(name);
    s.kind = ShapeKind::circle;
    s.cx = dist * std::cos(a);
    s.cy = dist * std::sin(a);
    s.semi_a = r;
    s.semi_b = r;
    s.xct = xct;
    s.dot = dot;
    return s;
}

}  // namespace

PhantomPair builtin_phantom(const std::string& name) {
    PhantomPair p;
    p.name = name;
    p.xct_background = 1.0;
    p.dot_background = 0.01;
    const double x_big = 2.0, d_big = 0.03, x_small = 2.5;

    if (name == "phantom1" || name == "phantom3") {
        if (name == "phantom1") {
            p.shapes.push_back(circle("middle", 0.0, 0.0, kMainRadius, x_big, d_big));
        } else {
            ShapeSpec e;
            e.name = "middle";
            e.kind = ShapeKind::ellipse;
            e.semi_a = 9.0;
            e.semi_b = 5.0;
            e.xct = x_big;
            e.dot = d_big;
            p.shapes.push_back(e);
        }
        p.shapes.push_back(circle("left", 210.0, kRing, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("right", 330.0, kRing, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("top", 90.0, kRing, kMainRadius, std::nullopt, d_big));
        p.shapes.push_back(circle("small", 330.0, kRing, kSmallRadius, x_small, std::nullopt));
    } else if (name == "phantom2") {
        p.shapes.push_back(circle("middle", 0.0, 0.0, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("left", 210.0, kRing, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("right", 330.0, kRing, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("top", 90.0, kRing, kMainRadius, x_big, d_big));
        p.shapes.push_back(circle("small", 330.0, kRing, kSmallRadius, x_small, std::nullopt));
    } else {
        throw ConfigError("unknown phantom '" + name + "' (expected phantom1, phantom2 or phantom3)");
    }
    return p;
}

ScalarField rasterize(const PhantomPair& p, const GridGeometry& g, Modality m, double dot_floor) {
    const double bg = m == Modality::xct ? p.xct_background : p.dot_background;
    const double outside = m == Modality::xct ? 0.0 : dot_floor;
    const double r2 = g.disk_radius * g.disk_radius;
    ScalarField f(g, outside);
    for (int row = 0; row < g.ny; ++row) {
        const double y = g.y_of(row);
        for (int col = 0; col < g.nx; ++col) {
            const double x = g.x_of(col);
            const double dx = x - g.center_x, dy = y - g.center_y;
            if (dx * dx + dy * dy > r2) continue;
            double v = bg;
            for (const auto& s : p.shapes) {
                const auto sv = s.value(m);
                if (sv && s.contains(dx, dy)) v = *sv;
            }
            f.at(row, col) = v;
        }
    }
    return f;
}

std::vector<unsigned char> shape_mask(const ShapeSpec& s, const GridGeometry& g) {
    std::vector<unsigned char> mask(g.size(), 0);
    const double r2 = g.disk_radius * g.disk_radius;
    for (int row = 0; row < g.ny; ++row)
        for (int col = 0; col < g.nx; ++col) {
            const double dx = g.x_of(col) - g.center_x, dy = g.y_of(row) - g.center_y;
            if (dx * dx + dy * dy <= r2 && s.contains(dx, dy)) mask[g.index(row, col)] = 1;
        }
    return mask;
}

Sinogram add_noise(const Sinogram& data, double eta, std::uint64_t seed) {
    Sinogram out(data.scan);
    out.values = add_relative_noise(data.values, eta, seed);
    return out;
}

BoundaryData add_noise(const BoundaryData& data, double eta, std::uint64_t seed) {
    BoundaryData out(data.n_sources, data.n_detectors);
    out.values = add_relative_noise(data.values, eta, seed);
    return out;
}

}  // namespace jbmir
