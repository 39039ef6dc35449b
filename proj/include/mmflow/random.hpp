#pragma once

#include <cstdint>
#include <random>

#include "mmflow/matrix.hpp"

namespace mmflow {

// Seeded ensembles. All generators are fresh per call, so a (seed, n) pair
// always yields the same values.

inline SquareMatrix seeded_normal_matrix(std::uint64_t seed, std::size_t n, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SquareMatrix m(n);
    for (double& v : m.values()) v = scale * normal(gen);
    return m;
}

inline Vector seeded_normal_vector(std::uint64_t seed, std::size_t n, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (double& x : v) x = scale * normal(gen);
    return v;
}

/// Derive an independent stream seed for a named component of one run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mmflow
