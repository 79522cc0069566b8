#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace adsim {

/// One step of SplitMix64 (Steele, Lea, Flood 2014). Advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent 64-bit seed for sub-stream `stream` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seeded generator used for every random draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Conversions to doubles and indices are done here rather than
/// through <random> distributions, which are implementation-defined, so a
/// given seed yields the same stream on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Inverse-CDF draw from a probability vector (need not be exactly
  /// normalized; the last index absorbs rounding slack).
  std::size_t categorical(std::span<const double> probs);

  /// Uniform index in [0, n). Requires n > 0.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adsim
