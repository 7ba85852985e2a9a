#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "spatmax/mathutil.hpp"

namespace spatmax {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

/// Counter-based stream: the state is a counter advanced by a fixed odd
/// increment and the output is a strong 64-bit finalizer of the counter
/// (splitmix64). Substreams are derived by hashing keys into the seed, so
/// per-(replicate, block, day) streams are independent of scheduling order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : counter_(detail::mix64(seed + detail::kGolden)) {}

  /// Derive a stream keyed by (seed, k1, k2, ...); identical keys give
  /// identical streams regardless of how many other streams were consumed.
  static CounterRng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t s = seed;
    for (std::uint64_t k : keys) {
      s = detail::mix64(s ^ detail::mix64(k + detail::kGolden));
    }
    return CounterRng(s);
  }

  std::uint64_t next_u64() noexcept {
    counter_ += detail::kGolden;
    return detail::mix64(counter_);
  }

  /// Uniform in the open interval (0, 1).
  double uniform() noexcept {
    std::uint64_t u;
    do {
      u = next_u64() >> 11;
    } while (u == 0);
    return static_cast<double>(u) * 0x1.0p-53;
  }

  /// Unit-rate exponential.
  double exponential() noexcept { return -std::log(uniform()); }

  /// Standard normal via Box-Muller (cosine branch; one value per call).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t counter_;
};

}  // namespace spatmax
