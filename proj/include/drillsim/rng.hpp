#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>

namespace drillsim::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream keys: derive(seed, stream, counter) never collides for
// distinct (stream, counter) pairs in practice.
inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                                      std::uint64_t counter = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

// Uniform in (0, 1), never exactly 0.
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Stratified inverse-CDF table: entry i is the standard-normal quantile at
// (i + 0.5) / size. Built once per process.
inline constexpr int kNormalTableBits = 16;
const std::array<float, std::size_t{1} << kNormalTableBits>& normal_table();

// Counter-based standard normal: the value for (key, index) does not depend on
// evaluation order, so parallel and serial renderers agree bit for bit. One
// hash and a table lookup, tails truncated near 4.2 sigma.
inline double normal_at(std::uint64_t key, std::uint64_t index) {
  const std::uint64_t a = splitmix64(key ^ (index * 0xD1B54A32D192ED03ULL));
  return normal_table()[static_cast<std::size_t>(a >> (64 - kNormalTableBits))];
}

// Uniform in [-1, 1) for (key, index).
inline double symmetric_at(std::uint64_t key, std::uint64_t index) {
  const std::uint64_t a = splitmix64(key ^ (index * 0x9FB21C651E98DF25ULL));
  return 2.0 * unit_open(a) - 1.0;
}

// Stream identifiers used when deriving per-trial keys.
enum Stream : std::uint64_t {
  kSpecimen = 1,
  kObserver = 2,
  kForce = 3,
  kDepthNoise = 4,
  kHueJitter = 5,
  kCollapse = 6,
};

}  // namespace drillsim::rng
