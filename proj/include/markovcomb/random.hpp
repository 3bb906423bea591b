#pragma once

// Seeded randomness shared by the samplers and the test generators.
//
// The engine is std::mt19937_64 seeded with the first SplitMix64 output of
// the user seed. split() derives an independent child stream from the
// SplitMix64 sequence, so every sampler instance owns its own state.

#include <cstdint>
#include <random>

#include "markovcomb/rational.hpp"

namespace mcomb {

// One SplitMix64 step; advances state.
std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  // 53 random bits scaled to [0, 1).
  double uniform();
  // Uniform on {0, ..., n - 1} by rejection; n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform on {lo, ..., hi}.
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  // k / den with k uniform on {0, ..., den}.
  Rational rational(std::int64_t den);

  Rng split();

 private:
  std::uint64_t split_state_;
  std::mt19937_64 engine_;
};

}  // namespace mcomb
