#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rfsgd {

// Mixes one 64-bit word into a well-spread successor (splitmix64 step).
// Used to derive independent sub-stream seeds from (seed, tag) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag ^ 0xa3c59ac2f0b2fa71ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag_a,
                                 std::uint64_t tag_b) {
  return derive_seed(derive_seed(seed, tag_a), tag_b);
}

// Deterministic RNG with in-house distribution transforms.
//
// mt19937_64 output is fixed by the standard, and the transforms below avoid
// std::uniform_real_distribution / std::normal_distribution, whose outputs are
// implementation-defined. Equal seeds therefore give bit-identical draws on
// any conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); never returns an endpoint, safe under log().
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; generates in pairs, caches the spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 6.283185307179586476925286766559 * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  // Unbiased uniform index on [0, n) by rejecting the short residue range.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (-n) % n;
    for (;;) {
      const std::uint64_t x = eng_();
      if (x >= threshold) return x % n;
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rfsgd
