#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace robotr1 {

/// FNV-1a, used to derive stable per-item seeds from string ids.
/// std::hash is not stable across standard libraries, this is.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
  return splitmix64(s);
}

/// Deterministic generator with identical output on every platform.
/// The standard distributions are implementation-defined, so all sampling
/// used for dataset bytes goes through this class.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds do not produce correlated first draws
    splitmix64(state_);
  }

  Rng(std::uint64_t seed, std::string_view stream_id) : Rng(seed ^ fnv1a64(stream_id)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller; caches the second draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  /// Child generator for an independent named stream.
  Rng derive(std::uint64_t stream) const { return Rng(mix_seed(state_, stream)); }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace robotr1
