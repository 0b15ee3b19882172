#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace jbmir {

/// SplitMix64 finaliser.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// k-th output (k = 0, 1, ...) of the SplitMix64 sequence started at `seed`:
/// mix(seed + (k + 1) * 0x9E3779B97F4A7C15). Random access, no hidden state.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t k);

/// Independent stream seed for a named consumer of one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n standard normals by Box-Muller on consecutive SplitMix64 outputs.
/// Pair p uses outputs 2p and 2p+1: u1 = (bits >> 11 + 1) 2^-53 in (0, 1], u2 = (bits >> 11) 2^-53,
/// z_{2p} = r cos(2 pi u2), z_{2p+1} = r sin(2 pi u2), r = sqrt(-2 ln u1).
std::vector<double> standard_normals(std::uint64_t seed, std::size_t n);

/// d + n with n a seeded normal draw rescaled so that |n| / |d| = eta exactly (Euclidean norms).
/// Throws DataError for non-finite data or when eta > 0 and |d| = 0; ConfigError for eta < 0.
std::vector<double> add_relative_noise(std::span<const double> d, double eta, std::uint64_t seed);

}  // namespace jbmir
