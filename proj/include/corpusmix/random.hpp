#pragma once

#include <cstdint>
#include <random>

namespace corpusmix {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 53 random mantissa bits mapped onto [0, 1).
inline double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform draw: a pure function of (seed, index), so results do
// not depend on iteration order or shard boundaries.
inline double counter_uniform(std::uint64_t seed, std::uint64_t index) {
  return unit_interval(splitmix64(splitmix64(seed) ^ splitmix64(index ^ 0x5851f42d4c957f2dULL)));
}

// Sequential generator with a portable uniform mapping (std::uniform_*_distribution
// output differs between standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_interval(engine_()); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace corpusmix
