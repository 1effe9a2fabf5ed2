#pragma once

// Deterministic counter-seeded random streams.
//
// Every permutation task derives its own stream from
// (master seed, region index, permutation index), so results are
// bit-identical no matter how the work is scheduled across threads.
// The standard library generators/distributions are avoided on purpose:
// their streams are implementation-defined and would break the
// reproducibility contract.

#include <cmath>
#include <cstdint>
#include <vector>

namespace floodaudit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small/sequential seeds decorrelate
    next_u64();
    next_u64();
  }

  // Stream keyed by (master, a, b); used as (seed, region, permutation).
  static Rng stream(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = master;
    s = splitmix(s + 0x9e3779b97f4a7c15ULL + a);
    s = splitmix(s + 0x9e3779b97f4a7c15ULL + b);
    return Rng(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix(state_);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // unbiased integer in [0, n), Lemire's multiply-with-rejection
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t t = -n % n;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // standard normal, Box-Muller
  double next_normal() {
    double u1 = next_double_open();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // Poisson draw; inversion for small means, normal approximation would
  // break determinism guarantees least, but means stay small here so
  // Knuth's product method is fine.
  std::uint64_t next_poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 60.0) {
      double limit = std::exp(-lambda);
      double prod = next_double_open();
      std::uint64_t k = 0;
      while (prod > limit) {
        ++k;
        prod *= next_double_open();
      }
      return k;
    }
    // split large means to keep the product away from underflow
    std::uint64_t half = next_poisson(lambda / 2.0);
    return half + next_poisson(lambda - lambda / 2.0);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace floodaudit
