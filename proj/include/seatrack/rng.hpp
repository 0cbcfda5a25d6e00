#pragma once

#include <cmath>
#include <cstdint>

#include "seatrack/error.hpp"

namespace seatrack {

// PCG32 (64-bit state, xorshift-rotate output). Chosen because the exact
// output stream is part of the reproducibility contract: two builds with the
// same seed must produce bit-identical draws, which rules out
// implementation-defined std:: distributions. Do not change the constants.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL)
      : state_(0), inc_((stream << 1u) | 1u) {
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform draw in [0, 1) with 32 bits of resolution.
  double uniform() { return next_u32() * 0x1.0p-32; }

  // Uniform draw in [lo, hi); requires lo < hi.
  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("rng: uniform bounds require lo < hi");
    double v = lo + (hi - lo) * uniform();
    if (v >= hi) v = std::nextafter(hi, lo);
    return v;
  }

  // Unbiased-enough index in [0, n) via the fixed-point multiply trick;
  // deterministic and branch-free, which matters more here than the ~2^-32
  // selection bias.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ArgumentError("rng: uniform_index needs n > 0");
    return static_cast<std::size_t>((static_cast<std::uint64_t>(next_u32()) * n) >> 32);
  }

  // Integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ArgumentError("rng: uniform_int bounds require lo <= hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>((static_cast<std::uint64_t>(next_u32()) * span) >> 32);
  }

  // Standard normal via Box-Muller, caching the spare value.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  std::uint64_t inc_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace seatrack
