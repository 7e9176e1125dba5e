// SPDX-License-Identifier: Apache-2.0
//
// Rate-5/6 punctured convolutional code and soft-input max-log Viterbi
// decoding.
//
// Mother code: constraint length 7, generators 133/171 (octal), rate 1/2,
// terminated with 6 zero tail bits. Puncturing over periods of 5 input bits
// (10 mother bits), 802.11-compatible:
//
//   stream A (133): keep 1 1 0 1 0
//   stream B (171): keep 1 0 1 0 1
//
// so 6 of every 10 mother bits survive. Encoder input length plus the 6 tail
// bits must be a multiple of 5; coded length is 6(info+6)/5.
//
// LLR convention: positive favors bit 1 (matching the max-log demapper);
// punctured positions enter the decoder as zeros.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cgmimo/rng.hpp"

namespace cgmimo::phy {

std::size_t coded_length(std::size_t info_bits);
// Largest info length whose codeword fits in `coded_bits` exactly; throws if
// coded_bits is not a multiple of 6.
std::size_t info_length_for_coded(std::size_t coded_bits);

std::vector<std::uint8_t> conv_encode(const std::vector<std::uint8_t>& info_bits);
std::vector<std::uint8_t> viterbi_decode_soft(const std::vector<double>& coded_llrs);

// Pseudorandom interleaver permutation; interleaved[j] = bits[perm[j]].
std::vector<std::size_t> make_interleaver(std::size_t n, Rng& rng);
std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& bits,
                                     const std::vector<std::size_t>& perm);
// Routes stream-ordered LLRs back to coded-bit order.
std::vector<double> deinterleave_llrs(const std::vector<double>& stream_llrs,
                                      const std::vector<std::size_t>& perm);

}  // namespace cgmimo::phy
