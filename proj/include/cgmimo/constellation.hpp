// SPDX-License-Identifier: Apache-2.0
//
// Gray-labeled square QAM constellations, normalized to unit mean symbol
// energy.
//
// Labeling: a symbol carries bits_per_symbol bits, first transmitted bit in
// the MSB of the label. The upper half of the label Gray-codes the in-phase
// amplitude, the lower half the quadrature amplitude, each over the grid
// {-(L-1), ..., -1, +1, ..., +(L-1)} in ascending order. For 16-QAM
// (amplitudes scaled by 1/sqrt(10)) this gives:
//
//   I bits: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3   (same for Q bits)
//   label 0 = 0000 -> (-3 - 3i)/sqrt(10)
//
// so nearest neighbors differ in exactly one bit.

#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "cgmimo/linalg.hpp"

namespace cgmimo::phy {

enum class Modulation { kQpsk, kQam16, kQam64 };

Modulation parse_modulation(const std::string& name);  // qpsk | 16qam | 64qam
std::string modulation_name(Modulation m);

struct Constellation {
  Modulation kind;
  int bits_per_symbol;
  // Indexed by bit label (MSB-first).
  std::vector<cplx> points;
  // Per bit position b: labels whose bit b is 0 / 1.
  std::vector<std::vector<int>> bit0_labels;
  std::vector<std::vector<int>> bit1_labels;
  double symbol_energy;  // mean |a|^2 over the set; normalized to 1

  // Axis decomposition (the labeling is a product of two Gray-coded PAM
  // axes, so per-bit minima separate; the common other-axis term cancels in
  // the max-log difference). axis_bit{0,1}[p] hold the amplitudes whose
  // axis-label bit p is 0 / 1.
  int axis_bits;
  std::vector<std::vector<double>> axis_bit0;
  std::vector<std::vector<double>> axis_bit1;

  cplx map_label(unsigned label) const { return points[label]; }
};

Constellation make_constellation(Modulation kind);

// Bits (MSB-first per symbol) to symbols; size must divide bits_per_symbol.
std::vector<cplx> map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);
// Nearest-point hard decision, returns the label.
unsigned hard_demap(cplx received, const Constellation& c);

}  // namespace cgmimo::phy
