#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ubsim {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

// Named substream: each draw site owns one, so adding a site elsewhere does
// not shift anyone else's sequence. Variates are built from raw 64-bit words
// rather than std distributions, whose output differs across libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream) : eng_(mix(seed, stream)) {}

  std::uint64_t next() { return eng_(); }
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  static std::uint64_t mix(std::uint64_t seed, std::string_view stream) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : stream) h = (h ^ c) * 1099511628211ull;
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ubsim
