// SPDX-License-Identifier: Apache-2.0
//
// Frequency-domain per-subcarrier transmission model: i.i.d. Rayleigh
// channels, AWGN uplink y = H x + n and downlink y = H_d s + n.

#pragma once

#include "cgmimo/linalg.hpp"
#include "cgmimo/rng.hpp"

namespace cgmimo::phy {

struct ChannelRealization {
  ComplexMatrix h_uplink;  // B x U
  double noise_variance;   // N0 per complex entry
};

// B x U matrix of i.i.d. unit-variance circularly-symmetric complex Gaussian
// entries, drawn row-major.
ComplexMatrix rayleigh_channel(std::size_t bs_antennas, std::size_t users, Rng& rng);

ComplexVector transmit_uplink(const ComplexMatrix& h, const ComplexVector& x,
                              double n0, Rng& rng);
ComplexVector transmit_downlink(const ComplexMatrix& h_downlink, const ComplexVector& s,
                                double n0, Rng& rng);

// SNR bookkeeping with unit-energy constellations: the configured uplink SNR
// is the average receive SNR U Es / N0; the transmit SNR Es / N0 feeds the
// MMSE regularizer.
double uplink_noise_variance(double snr_db, std::size_t users);
// Downlink: unit total transmit power gives per-user receive SNR 1 / N0.
double downlink_noise_variance(double snr_db);

}  // namespace cgmimo::phy
