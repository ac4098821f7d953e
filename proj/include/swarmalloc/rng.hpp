#pragma once

#include <cstdint>
#include <random>

namespace swarmalloc {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable derivation of independent per-run seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

/// mt19937_64 with hand-rolled draw helpers. The standard distributions are
/// implementation-defined, so they are avoided to keep results reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = std::uint64_t(hi - lo) + 1;
    unsigned __int128 m = (unsigned __int128)next_u64() * span;
    return lo + std::int64_t(std::uint64_t(m >> 64));
  }

  bool coin() { return (next_u64() & 1) != 0; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace swarmalloc
