// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/rng.hpp"

#include <cmath>
#include <numbers>

namespace cgmimo::phy {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::fork(std::uint64_t stream) const {
  return Rng(mix64(mix64(key_ ^ 0x8BB84B93962EACC9ull) + stream));
}

std::uint64_t Rng::next_u64() { return mix64(key_ + kGolden * ++counter_); }

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  have_cached_ = true;
  return radius * std::cos(angle);
}

std::complex<double> Rng::next_cgaussian(double variance) {
  const double component_std = std::sqrt(0.5 * variance);
  const double re = next_gaussian();
  const double im = next_gaussian();
  return {component_std * re, component_std * im};
}

}  // namespace cgmimo::phy
