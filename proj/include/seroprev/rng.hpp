#pragma once

// Portable seeded random number generation. All distributions are implemented
// here rather than through <random> so that draw sequences are identical
// across standard libraries and platforms.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace seroprev::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless mix of up to three 64-bit keys into one; used to derive
/// per-chain, per-iteration, and per-unit streams from a single seed.
inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= splitmix64(s);
  s ^= c + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return splitmix64(s);
}

inline std::uint64_t hash_string(std::string_view sv) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char ch : sv) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline double u64_to_unit(std::uint64_t x) {
  // 53-bit mantissa, result in (0,1): never exactly 0 or 1.
  return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Uniform(0,1) deterministic in the key triple; safe to call concurrently.
inline double keyed_uniform(std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
  return u64_to_unit(mix_keys(a, b, c));
}

/// Inverse standard-normal CDF (Acklam's rational approximation with one
/// Halley refinement; absolute error below 1e-13 on (0,1)).
double norm_inv(double p);

inline double keyed_normal(std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t c = 0) {
  return norm_inv(keyed_uniform(a, b, c));
}

/// xoshiro256** stream, seeded through splitmix64.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  static Stream for_chain(std::uint64_t seed, std::uint64_t chain_index) {
    return Stream(mix_keys(seed, 0x636861696eULL, chain_index));
  }
  static Stream substream(std::uint64_t seed, std::uint64_t tag,
                          std::uint64_t index) {
    return Stream(mix_keys(seed, tag, index));
  }

  std::uint64_t next_u64() {
    auto rotl = [](std::uint64_t x, int k) {
      return (x << k) | (x >> (64 - k));
    };
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

  double uniform() { return u64_to_unit(next_u64()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Marsaglia polar method.
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
  double normal(double mean, double sd) { return mean + sd * normal(); }

  double gamma(double shape);
  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  /// Index drawn from unnormalized nonnegative weights.
  template <typename Vec>
  std::size_t categorical(const Vec& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("categorical: zero mass");
    double u = uniform() * total;
    for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
      u -= weights[k];
      if (u <= 0.0) return k;
    }
    return weights.size() - 1;
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace seroprev::rng
