// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace cgmimo::phy {

ComplexMatrix rayleigh_channel(std::size_t bs_antennas, std::size_t users, Rng& rng) {
  if (bs_antennas < users || users < 1)
    throw std::invalid_argument("rayleigh_channel: need B >= U >= 1");
  ComplexMatrix h(bs_antennas, users);
  for (std::size_t b = 0; b < bs_antennas; ++b)
    for (std::size_t u = 0; u < users; ++u) h(b, u) = rng.next_cgaussian(1.0);
  return h;
}

namespace {

ComplexVector transmit(const ComplexMatrix& h, const ComplexVector& in, double n0, Rng& rng) {
  ComplexVector out = matvec(h, in);
  const double component_std = std::sqrt(0.5 * n0);
  for (cplx& v : out) {
    const double re = rng.next_gaussian();
    const double im = rng.next_gaussian();
    v += cplx(component_std * re, component_std * im);
  }
  return out;
}

}  // namespace

ComplexVector transmit_uplink(const ComplexMatrix& h, const ComplexVector& x,
                              double n0, Rng& rng) {
  return transmit(h, x, n0, rng);
}

ComplexVector transmit_downlink(const ComplexMatrix& h_downlink, const ComplexVector& s,
                                double n0, Rng& rng) {
  return transmit(h_downlink, s, n0, rng);
}

double uplink_noise_variance(double snr_db, std::size_t users) {
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  return static_cast<double>(users) / snr_linear;  // Es = 1
}

double downlink_noise_variance(double snr_db) {
  return 1.0 / std::pow(10.0, snr_db / 10.0);
}

}  // namespace cgmimo::phy
