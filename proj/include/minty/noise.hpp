#pragma once

#include <cstdint>

#include "minty/operators.hpp"

namespace minty {

/// Counter-based Gaussian noise: every draw is a pure function of
/// (seed, iteration, call index, coordinate), so runs are reproducible
/// regardless of evaluation order.
class CounterNoise {
 public:
  CounterNoise(std::uint64_t seed, double sigma) : seed_(seed), sigma_(sigma) {}

  double sigma() const { return sigma_; }
  /// Standard normal draw.
  double standard_normal(std::uint64_t k, std::uint64_t call, std::uint64_t coord) const;
  /// sigma * N(0, I) of the given dimension.
  Vector sample(std::uint64_t k, std::uint64_t call, int dim) const;

 private:
  std::uint64_t seed_;
  double sigma_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace minty
