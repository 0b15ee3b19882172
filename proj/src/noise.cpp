#include "jbmir/noise.hpp"

#include <cmath>
#include <numbers>

#include "jbmir/errors.hpp"

namespace jbmir {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t k) { return splitmix64_mix(seed + (k + 1) * kGolden); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64_mix(seed ^ splitmix64_mix(stream + kGolden));
}

std::vector<double> standard_normals(std::uint64_t seed, std::size_t n) {
    std::vector<double> z(n);
    constexpr double kUnit = 0x1.0p-53;
    for (std::size_t p = 0; 2 * p < n; ++p) {
        const std::uint64_t a = splitmix64_at(seed, 2 * p);
        const std::uint64_t b = splitmix64_at(seed, 2 * p + 1);
        const double u1 = static_cast<double>((a >> 11) + 1) * kUnit;
        const double u2 = static_cast<double>(b >> 11) * kUnit;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        z[2 * p] = r * std::cos(phi);
        if (2 * p + 1 < n) z[2 * p + 1] = r * std::sin(phi);
    }
    return z;
}

std::vector<double> add_relative_noise(std::span<const double> d, double eta, std::uint64_t seed) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("noise level must be finite and >= 0");
    double dd = 0.0;
    for (double x : d) {
        if (!std::isfinite(x)) throw DataError("noise: measurement contains non-finite values");
        dd += x * x;
    }
    std::vector<double> out(d.begin(), d.end());
    if (eta == 0.0) return out;
    if (dd == 0.0) throw DataError("noise: relative noise requested for all-zero data");

    const std::vector<double> z = standard_normals(seed, d.size());
    double zz = 0.0;
    for (double x : z) zz += x * x;
    if (zz == 0.0) throw NumericalError("noise: degenerate normal draw");
    const double scale = eta * std::sqrt(dd) / std::sqrt(zz);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += scale * z[k];
    return out;
}

}  // namespace jbmir
