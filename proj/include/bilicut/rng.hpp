#pragma once

#include <array>
#include <cstdint>

namespace bilicut {

/// SplitMix64 step; also used to derive child seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** seeded from four successive SplitMix64 outputs.
///
/// Derived draws are fixed so instances reproduce across implementations:
///   uniform01()  = (next() >> 11) · 2⁻⁵³
///   uniform(a,b) = a + (b − a) · uniform01()
///   below(r)     = ⌊uniform01() · r⌋   (r ≥ 1)
class Xoshiro256 {
 public:
  explicit constexpr Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  constexpr std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  std::uint64_t below(std::uint64_t r) {
    return static_cast<std::uint64_t>(uniform01() * static_cast<double>(r));
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// Deterministic child seed from a parent seed and a salt.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) {
  std::uint64_t state = parent ^ (salt * 0xd1b54a32d192ed03ULL);
  return splitmix64(state);
}

}  // namespace bilicut
