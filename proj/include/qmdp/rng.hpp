#pragma once

#include <cmath>
#include <cstdint>

namespace qmdp {

/// Splittable generator built on splitmix64. Every stochastic operation in
/// the library takes an explicit seed; independent substreams are derived
/// with split(), never shared.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  /// Derives an independent stream. Depends only on the construction seed,
  /// not on how much of this stream has been consumed.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(seed_ ^ 0x9e3779b97f4a7c15ULL, stream));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller. No spare caching, so the draw sequence
  /// is a pure function of position in the stream.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692528676655900577 * u2);
  }

  /// Uniform in {0, ..., n-1}.
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_;
};

} // namespace qmdp
