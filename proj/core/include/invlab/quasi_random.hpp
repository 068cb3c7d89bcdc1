#pragma once

#include <cstdint>
#include <random>

#include "invlab/types.hpp"

namespace invlab {

/// Halton points in [0,1)^d (bases 2 and 3) with a Cranley-Patterson shift
/// drawn from the seed, so that different seeds give independent
/// low-discrepancy point sets and equal seeds give identical ones.
class HaltonSequence {
 public:
  HaltonSequence(int dim, std::uint64_t seed, std::uint64_t skip = 0);

  Vec next();
  Vec at(std::uint64_t index) const;

 private:
  int dim_;
  Vec shift_{0.0, 0.0};
  std::uint64_t index_;
};

double radical_inverse(std::uint64_t index, unsigned base);

/// Deterministic engine used for all pseudo-random draws in the library.
using Rng = std::mt19937_64;

}  // namespace invlab
