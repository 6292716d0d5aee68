#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fplab {

// Counter-based random streams.  Every draw is a pure function of
// (seed, counter words), so parallel consumers and repeated runs see
// bitwise-identical numbers regardless of evaluation order.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ a);
  h = mix(h ^ b);
  h = mix(h ^ c);
  return h;
}

// Uniform on (0,1]; never returns 0 so it is safe under log().
inline double uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
  return (double)((hash(seed, a, b, c) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two decorrelated uniforms.
inline double normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  std::uint64_t h = hash(seed, a, b, c);
  double u1 = (double)((h >> 11) + 1) * 0x1.0p-53;
  double u2 = (double)((mix(h) >> 11) + 1) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng
}  // namespace fplab
