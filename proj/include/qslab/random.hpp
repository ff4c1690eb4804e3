#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qslab {

/// 64-bit FNV-1a. Used for stream names and report digests; stable across
/// platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seeded random stream. std::mt19937_64 is fully specified by the standard;
/// the conversions below avoid the implementation-defined distributions so
/// the same seed yields the same draws everywhere.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Independent sub-stream derived from a base seed and a name.
  static Stream named(std::uint64_t seed, std::string_view name) { return Stream(seed ^ mix(fnv1a(name))); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace qslab
