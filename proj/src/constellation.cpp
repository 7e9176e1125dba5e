// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/constellation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cgmimo::phy {

Modulation parse_modulation(const std::string& name) {
  if (name == "qpsk") return Modulation::kQpsk;
  if (name == "16qam") return Modulation::kQam16;
  if (name == "64qam") return Modulation::kQam64;
  throw std::invalid_argument("unknown modulation: " + name);
}

std::string modulation_name(Modulation m) {
  switch (m) {
    case Modulation::kQpsk: return "qpsk";
    case Modulation::kQam16: return "16qam";
    case Modulation::kQam64: return "64qam";
  }
  return "?";
}

namespace {

unsigned gray_decode(unsigned g) {
  unsigned m = g;
  for (unsigned s = g >> 1; s != 0; s >>= 1) m ^= s;
  return m;
}

}  // namespace

Constellation make_constellation(Modulation kind) {
  int bps = 0;
  switch (kind) {
    case Modulation::kQpsk: bps = 2; break;
    case Modulation::kQam16: bps = 4; break;
    case Modulation::kQam64: bps = 6; break;
  }
  const int half = bps / 2;
  const unsigned levels = 1u << half;
  const unsigned count = 1u << bps;

  // Unit-energy scale: mean of amp^2 over {-(L-1),...,L-1 odd} is
  // (L^2 - 1)/3 per axis.
  const double axis_power = (static_cast<double>(levels) * levels - 1.0) / 3.0;
  const double scale = 1.0 / std::sqrt(2.0 * axis_power);

  Constellation c;
  c.kind = kind;
  c.bits_per_symbol = bps;
  c.points.resize(count);
  c.bit0_labels.assign(bps, {});
  c.bit1_labels.assign(bps, {});

  double energy = 0.0;
  for (unsigned label = 0; label < count; ++label) {
    const unsigned gi = label >> half;
    const unsigned gq = label & (levels - 1);
    const double amp_i = 2.0 * gray_decode(gi) - (levels - 1.0);
    const double amp_q = 2.0 * gray_decode(gq) - (levels - 1.0);
    c.points[label] = cplx(amp_i * scale, amp_q * scale);
    energy += std::norm(c.points[label]);
    for (int b = 0; b < bps; ++b) {
      const bool is_one = (label >> (bps - 1 - b)) & 1u;
      (is_one ? c.bit1_labels : c.bit0_labels)[b].push_back(static_cast<int>(label));
    }
  }
  c.symbol_energy = energy / count;

  c.axis_bits = half;
  c.axis_bit0.assign(half, {});
  c.axis_bit1.assign(half, {});
  for (unsigned g = 0; g < levels; ++g) {
    const double amp = (2.0 * gray_decode(g) - (levels - 1.0)) * scale;
    for (int p = 0; p < half; ++p) {
      const bool is_one = (g >> (half - 1 - p)) & 1u;
      (is_one ? c.axis_bit1 : c.axis_bit0)[p].push_back(amp);
    }
  }
  return c;
}

std::vector<cplx> map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
  const std::size_t bps = c.bits_per_symbol;
  if (bits.size() % bps != 0)
    throw std::invalid_argument("map_bits: bit count not divisible by bits per symbol");
  std::vector<cplx> symbols(bits.size() / bps);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    unsigned label = 0;
    for (std::size_t b = 0; b < bps; ++b) label = (label << 1) | (bits[s * bps + b] & 1u);
    symbols[s] = c.points[label];
  }
  return symbols;
}

unsigned hard_demap(cplx received, const Constellation& c) {
  unsigned best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned label = 0; label < c.points.size(); ++label) {
    const double d = std::norm(received - c.points[label]);
    if (d < best_dist) {
      best_dist = d;
      best = label;
    }
  }
  return best;
}

}  // namespace cgmimo::phy
