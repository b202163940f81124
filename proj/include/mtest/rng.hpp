#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mtest/common.hpp"

namespace mtest {

/// Seeded generator with platform-independent derived draws.
///
/// std::mt19937_64's raw output is fixed by the standard, but the standard
/// distributions are not, so bounded integers and unit reals are derived here
/// directly. Every generator and tester takes one of these by reference.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  Index index(std::size_t n) { return static_cast<Index>(below(n)); }
  /// Uniform in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  /// Uniform double in [0, 1) with 53 random bits.
  double unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  bool coin() { return (next() >> 63) != 0; }

  /// Fisher-Yates shuffle of [0, n).
  std::vector<Index> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// Derive an independent stream seed for trial `index` of a campaign seeded
/// with `base` (splitmix64 finaliser over the pair).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace mtest
