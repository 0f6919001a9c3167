#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace treelens {

// Deterministic 64-bit generator (splitmix64 seeding + xoshiro256**).
// Not std::uniform_int_distribution: its mapping is implementation-defined,
// and every sampled scan must replay bit-identically from a recorded seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased draw in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // k distinct sorted values from [0, n), k <= n.
  std::vector<std::uint64_t> distinct_sorted(std::uint64_t n, std::uint64_t k);

 private:
  static std::uint64_t rotl(std::uint64_t v, int s) {
    return (v << s) | (v >> (64 - s));
  }

  std::uint64_t state_[4] = {};
};

inline std::vector<std::uint64_t> Rng::distinct_sorted(std::uint64_t n,
                                                       std::uint64_t k) {
  // Floyd's sampling; O(k) expected, independent of n.
  std::vector<std::uint64_t> picked;
  picked.reserve(k);
  for (std::uint64_t j = n - k; j < n; ++j) {
    const std::uint64_t t = below(j + 1);
    bool seen = false;
    for (auto v : picked) {
      if (v == t) {
        seen = true;
        break;
      }
    }
    picked.push_back(seen ? j : t);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace treelens
