#ifndef UQSCALE_RNG_HPP
#define UQSCALE_RNG_HPP

#include <cstdint>
#include <random>

namespace uqscale {

/// splitmix64 step; used to derive independent substream seeds from a master
/// seed so that e.g. the A and B sample matrices never share a stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t tag) {
  return splitmix64(master ^ splitmix64(tag + 1));
}

/// Deterministic uniform generator. All draws are derived from the raw
/// mt19937_64 output with explicit arithmetic, so sequences are bit-identical
/// across platforms and standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) without modulo bias (rejection sampling).
  std::uint64_t index(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  /// Fisher-Yates shuffle using this generator (std::shuffle is
  /// implementation-defined and would break cross-platform determinism).
  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = index(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace uqscale

#endif
