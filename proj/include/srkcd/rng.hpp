#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace srkcd {

/// Deterministic random stream: a seeded std::mt19937_64 (whose output
/// sequence is fixed by the standard) combined with explicitly coded
/// uniform and Box-Muller normal transforms.  std::*_distribution is
/// avoided on purpose: its algorithm is implementation-defined, which would
/// tie generated datasets to one standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1]; never returns 0, so log() is safe.
  double uniform_unit() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via the Box-Muller transform; the second variate of
  /// each pair is cached and returned on the next call.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_unit();
    const double u2 = uniform_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 scrambler, used to derive independent per-cell seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one (grid index, repeat index) cell of a sweep.  Independent of
/// worker scheduling by construction.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t i, std::uint64_t j) {
  return splitmix64(splitmix64(splitmix64(base) ^ (i + 1)) ^ ((j + 1) << 20));
}

}  // namespace srkcd
