#pragma once

#include <cmath>
#include <cstdint>

namespace fairaudit {

/// Counter-based deterministic RNG. Each (seed, stream) pair yields an
/// independent sequence; outputs depend only on (seed, stream, draw index),
/// never on evaluation order or thread count.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(mix(seed) ^ (0x9E3779B97F4A7C15ull * (stream + 1)))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix_out(state_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
  std::uint64_t next_below(std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next_u64()) * n) >> 64);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Standard normal via Box-Muller. Consumes two uniforms per call (the
  /// second value is discarded so the draw count stays fixed).
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();  // log(0) guard; p ~ 2^-53
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    return mix_out(x);
  }
  static std::uint64_t mix_out(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t state_;
};

}  // namespace fairaudit
