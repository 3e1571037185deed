#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace occamnet {

/// Seeded deterministic stream. The engine (mt19937_64) is fully specified by
/// the C++ standard, and the conversions below avoid the implementation-defined
/// std distributions, so a seed yields the same draws on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  static constexpr std::string_view algorithm() { return "mt19937_64"; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n); n must be positive. Unbiased by rejection.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent child stream derived from this seed and a salt.
  RngStream fork(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace occamnet
