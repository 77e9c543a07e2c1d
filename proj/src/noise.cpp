#include "minty/noise.hpp"

#include <cmath>
#include <numbers>

namespace minty {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

// Uniform in (0, 1): 53 random mantissa bits, offset by half an ulp.
double to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double CounterNoise::standard_normal(std::uint64_t k, std::uint64_t call, std::uint64_t coord) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ k);
  h = splitmix64(h ^ (call << 32 | coord));
  const double u1 = to_open_unit(h);
  const double u2 = to_open_unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector CounterNoise::sample(std::uint64_t k, std::uint64_t call, int dim) const {
  Vector out(dim);
  for (int i = 0; i < dim; ++i) out[i] = sigma_ * standard_normal(k, call, static_cast<std::uint64_t>(i));
  return out;
}

}  // namespace minty
