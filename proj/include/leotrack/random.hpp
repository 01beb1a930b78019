#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace leotrack {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds from a
/// master seed and a counter.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return splitmix64(splitmix64(master) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

/// Draw from CN(0, variance).
inline std::complex<double> complex_normal(Rng& rng, double variance = 1.0) {
  const double s = std::sqrt(variance / 2.0);
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return {s * re, s * im};
}

inline double uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

}  // namespace leotrack
