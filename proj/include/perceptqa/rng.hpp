#pragma once

#include <cstdint>
#include <vector>

#include "perceptqa/common.hpp"

namespace pqa {

// xoshiro256++ seeded through splitmix64. Standard-library distributions are
// implementation-defined, so every random draw in the project goes through
// this generator to keep output byte-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Stable seed derivation for independent child streams.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    x ^= b * 0xff51afd7ed558ccdULL;
    return splitmix64(x);
  }

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  std::uint64_t seed() const { return seed_; }

  Rng fork(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

  // Uniform in [0, 1), 53-bit resolution.
  double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform in [0, n). Rejection keeps the draw unbiased and deterministic.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) fail(Err::OutOfRange, "below(0)");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = u64();
      if (r >= threshold) return r % n;
    }
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    if (hi < lo) fail(Err::OutOfRange, "uniform_int range");
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool chance(double p) { return unit() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    if (v.empty()) fail(Err::OutOfRange, "pick from empty vector");
    return v[below(v.size())];
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Index draw from non-negative weights; total must be positive.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) {
      if (w < 0) fail(Err::OutOfRange, "negative weight");
      total += w;
    }
    if (total <= 0) fail(Err::OutOfRange, "weights sum to zero");
    double t = unit() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      t -= weights[i];
      if (t < 0) return i;
    }
    return weights.size() - 1;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace pqa
