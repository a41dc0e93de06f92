#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace lvad {

// splitmix64, used to derive independent stream seeds from a root seed and a
// label. The constants are the reference ones from Steele et al.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_label(std::string_view label) {
  // FNV-1a, folded through splitmix for avalanche.
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(h);
}

// Portable deterministic random source.
//
// The raw generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard, so identical seeds reproduce identical streams on every
// conforming platform. All distribution transforms are implemented here
// (never via std::*_distribution, whose outputs are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  // Derive a child stream from a root seed and a purpose label.
  static Rng derive(uint64_t root, std::string_view label) {
    return Rng(splitmix64(root ^ hash_label(label)));
  }
  static Rng derive(uint64_t root, std::string_view label, uint64_t index) {
    return Rng(splitmix64(splitmix64(root ^ hash_label(label)) + index));
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1): 53 random bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Rejection sampling keeps the result unbiased
  // and the draw count deterministic given the stream.
  uint64_t uniform_index(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Standard normal via Box-Muller; caches the paired draw.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = double((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lvad
