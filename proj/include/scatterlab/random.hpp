#pragma once

#include <cstdint>
#include <random>

#include "scatterlab/laplacian.hpp"

namespace scatterlab {

// Uniform double in [0, 1) from the top 53 bits; unlike
// std::uniform_real_distribution the sequence is the same on every toolchain.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Entries with real and imaginary parts uniform in [-1, 1).
inline State random_state(std::size_t n, std::mt19937_64& rng) {
  State out(n);
  for (auto& v : out) {
    const double re = 2.0 * uniform01(rng) - 1.0;
    const double im = 2.0 * uniform01(rng) - 1.0;
    v = {re, im};
  }
  return out;
}

}  // namespace scatterlab
