#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace aifad {

/// Seeded 64-bit generator injected everywhere randomness is needed.
///
/// Uniform doubles are built from the top 53 bits of the engine output so
/// that sequences are identical across standard library implementations.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  /// Draws an index with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);

  /// Independent generator whose seed is derived from this one's seed and `stream`.
  /// Does not advance this generator.
  RandomSource fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace aifad
