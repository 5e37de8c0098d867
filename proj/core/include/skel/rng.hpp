#pragma once

#include <cstdint>
#include <random>

namespace skel {

/// Default seed for every stochastic routine ("SKEL" in ASCII).
inline constexpr std::uint64_t kDefaultSeed = 0x534B454CULL;

using Rng = std::mt19937_64;

/// Independent stream tags so that modules sharing one base seed never overlap.
enum class Stream : std::uint64_t {
  audit = 1,
  ulam = 2,
  correlation = 3,
  example = 4,
  probe = 5,
  simulation = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, static_cast<std::uint64_t>(stream), index));
}

/// Uniform double in [lo, hi) built from the top 53 bits, identical across standard libraries.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace skel
