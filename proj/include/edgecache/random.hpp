#pragma once

#include <cstdint>
#include <random>

namespace edgecache {

using Rng = std::mt19937_64;

// Uniform draw on the open interval (0, 1) built from the top 53 bits, so
// sequences are identical across standard library implementations.
inline double unit_uniform(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// splitmix64 finaliser; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)) %
         n;
}

}  // namespace edgecache
