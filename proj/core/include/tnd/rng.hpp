#pragma once

#include <cstdint>
#include <string_view>

namespace tnd {

/// Deterministic random stream.
///
/// Wraps a splitmix64-seeded xoshiro256** generator and implements the
/// distributions the library needs itself, because the std:: distributions
/// are allowed to differ between standard library implementations and the
/// artifacts must be reproducible from a seed alone.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent child stream identified by a name and an index.
  /// Deriving does not advance the parent.
  Rng derive(std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t index(std::uint64_t n);
  bool bernoulli(double p);
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace tnd
