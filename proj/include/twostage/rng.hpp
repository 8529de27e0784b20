#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace twostage {

/// Seedable, splittable random stream. Each stream is a Mersenne twister seeded
/// from (seed, stream) through std::seed_seq, so replica i of a study always
/// sees the same numbers regardless of thread count or scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Exponential with the given rate; +inf when rate is 0.
  double exponential(double rate);
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream labelled by `stream`.
  Rng split(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// Stable seed derivation: distinct (master, label) pairs map to unrelated seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label);

/// Map a 64-bit word to (0, 1), never returning 0 or 1.
inline double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace twostage
