#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace viewcap {

// Counter-free splitmix64 generator. Everything seeded in this project goes
// through this type so that runs are bit-reproducible across platforms
// (std::uniform_*_distribution output is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0; modulo bias is irrelevant at
  // the scales used here.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + int(below(std::uint64_t(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller (one value per call, cached pair unused
  // on purpose: keeps the stream position independent of call parity).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

inline std::uint64_t hash_all(std::initializer_list<std::uint64_t> vs) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (std::uint64_t v : vs) h = hash_mix(h, v);
  return h;
}

}  // namespace viewcap
