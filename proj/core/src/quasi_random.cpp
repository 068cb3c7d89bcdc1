#include "invlab/quasi_random.hpp"

#include <cmath>

namespace invlab {

double radical_inverse(std::uint64_t index, unsigned base) {
  const double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

HaltonSequence::HaltonSequence(int dim, std::uint64_t seed, std::uint64_t skip)
    : dim_(dim), index_(skip + 1) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < dim_; ++k) shift_[k] = unit(rng);
}

Vec HaltonSequence::at(std::uint64_t index) const {
  static constexpr unsigned kBases[kMaxDim] = {2, 3};
  Vec u{0.0, 0.0};
  for (int k = 0; k < dim_; ++k) {
    double v = radical_inverse(index, kBases[k]) + shift_[k];
    u[k] = v - std::floor(v);
  }
  return u;
}

Vec HaltonSequence::next() { return at(index_++); }

}  // namespace invlab
