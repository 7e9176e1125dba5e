// SPDX-License-Identifier: Apache-2.0
//
// Counter-based splittable random stream (splitmix64 core). Every trial,
// subcarrier, and purpose forks its own stream from a path of ids, so draws
// are reproducible independent of scheduling order.

#pragma once

#include <complex>
#include <cstdint>

namespace cgmimo::phy {

class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  // Independent child stream; forking does not disturb this stream.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t next_u64();
  double next_unit();      // [0, 1)
  double next_gaussian();  // standard normal (Box-Muller)
  // Circularly-symmetric complex Gaussian with the given variance per
  // complex entry (variance/2 per real component).
  std::complex<double> next_cgaussian(double variance);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace cgmimo::phy
