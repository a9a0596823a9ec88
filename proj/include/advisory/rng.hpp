// Seeded random streams. All stochasticity in the project flows from one
// master seed through named substreams, so runs are bit-reproducible.
// Distributions are hand-rolled on top of std::mt19937_64 because the
// standard library distributions are implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace advisory {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 1099511628211ull;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (no spare caching; two words per draw).
  double normal() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double std_dev) { return mean + std_dev * normal(); }

  // Uniform integer in [0, n), bias-free via rejection.
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return static_cast<int>(x % un);
  }

  // Child stream derived from this stream's seed (not its state), so the
  // derivation order never matters.
  Rng substream(std::string_view tag, std::uint64_t index = 0) const {
    std::uint64_t s = seed_ ^ detail::fnv1a(tag);
    s = detail::splitmix64(s + 0x9e3779b97f4a7c15ull * (index + 1));
    return Rng(s);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace advisory
