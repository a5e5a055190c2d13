#pragma once

#include <cstdint>

namespace fbm {

/// Counter-based generator: every 64-bit block is a stateless hash of
/// (seed, stream, counter), so parallel consumers draw identical values
/// regardless of scheduling.
struct CounterRng {
  std::uint64_t seed = 0;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t word(std::uint64_t stream, std::uint64_t counter) const {
    return mix(mix(seed ^ mix(stream)) ^ counter);
  }

  /// Uniform sign in {-1, +1}: bit `k` of the stream's bit sequence.
  int sign(std::uint64_t stream, std::uint64_t k) const {
    std::uint64_t w = word(stream, k >> 6);
    return (w >> (k & 63)) & 1 ? 1 : -1;
  }
};

}  // namespace fbm
