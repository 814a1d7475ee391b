#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dmcanc {

/// Seedable random stream with explicit output transforms.
///
/// std::mt19937_64 is fully specified by the standard, but the std
/// distributions are not; drawing through them would make streams differ
/// between standard-library implementations. All consumers of randomness in
/// this project (noise synthesis, path generation, estimate perturbation) go
/// through this class so that a seed pins the byte-exact result.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const double span = static_cast<double>(hi - lo + 1);
    auto offset = static_cast<std::int64_t>(uniform01() * span);
    if (offset > hi - lo) offset = hi - lo;  // guard the u == max edge
    return lo + offset;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dmcanc
