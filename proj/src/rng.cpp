#include "occamnet/rng.hpp"

#include <limits>
#include <stdexcept>

namespace occamnet {

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

RngStream RngStream::fork(std::uint64_t salt) const {
  // splitmix64 finalizer over (seed, salt)
  std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return RngStream(z ^ (z >> 31));
}

}  // namespace occamnet
