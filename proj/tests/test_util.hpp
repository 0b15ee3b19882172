#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "jbmir/grid.hpp"

namespace test {

/// n x n grid covering the standard 25 mm disk.
inline jbmir::GridGeometry small_grid(int n) {
    jbmir::GridGeometry g;
    g.nx = n;
    g.ny = n;
    g.h = 50.0 / n;
    return g;
}

inline jbmir::ScalarField random_field(const jbmir::GridGeometry& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    jbmir::ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng);
    return f;
}

/// Fresh empty directory below the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / "jbmir_tests" / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline double rel_err(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace test
