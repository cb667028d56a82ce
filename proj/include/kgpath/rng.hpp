#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kgpath {

// Portable seedable generator: xoshiro256** with splitmix64 state expansion.
// All dataset and training randomness flows through this type so that runs
// are reproducible bit-for-bit across platforms and standard libraries
// (std::uniform_int_distribution et al. are not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
    spare_valid_ = false;
  }

  static constexpr const char* kName = "xoshiro256** (splitmix64-seeded)";

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, n). Rejection sampling on the top range.
  uint64_t below(uint64_t n) {
    const uint64_t threshold = -n % n;
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; caches the second draw.
  double gaussian() {
    if (spare_valid_) {
      spare_valid_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    spare_valid_ = true;
    return mag * std::cos(ang);
  }

  // Independent child stream; used to shard generation without coupling
  // the parent's sequence to consumption order.
  Rng substream(uint64_t index) const {
    uint64_t x = state_[0] ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return Rng(splitmix64(x));
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr uint64_t rotl(uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  uint64_t state_[4];
  double spare_ = 0.0;
  bool spare_valid_ = false;
};

}  // namespace kgpath
