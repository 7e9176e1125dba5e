// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/coding.hpp"

#include <array>
#include <bit>
#include <limits>
#include <stdexcept>

namespace cgmimo::phy {

namespace {

constexpr int kConstraint = 7;
constexpr int kTail = kConstraint - 1;
constexpr unsigned kStates = 1u << kTail;
// Register word: current input at bit 6, previous bits below; the octal
// generators read off directly against that word.
constexpr unsigned kGenA = 0133;
constexpr unsigned kGenB = 0171;
constexpr std::array<int, 5> kKeepA = {1, 1, 0, 1, 0};
constexpr std::array<int, 5> kKeepB = {1, 0, 1, 0, 1};
constexpr std::size_t kPuncturePeriod = 5;

unsigned parity(unsigned word) { return std::popcount(word) & 1u; }

struct Branch {
  unsigned next_state;
  unsigned out_a;
  unsigned out_b;
};

const std::array<std::array<Branch, 2>, kStates>& branch_table() {
  static const auto table = [] {
    std::array<std::array<Branch, 2>, kStates> t{};
    for (unsigned s = 0; s < kStates; ++s) {
      for (unsigned u = 0; u < 2; ++u) {
        const unsigned word = (u << kTail) | s;
        t[s][u] = Branch{word >> 1, parity(word & kGenA), parity(word & kGenB)};
      }
    }
    return t;
  }();
  return table;
}

}  // namespace

std::size_t coded_length(std::size_t info_bits) {
  const std::size_t total = info_bits + kTail;
  if (total % kPuncturePeriod != 0)
    throw std::invalid_argument("coded_length: info length + tail not a multiple of the puncture period");
  return total / kPuncturePeriod * 6;
}

std::size_t info_length_for_coded(std::size_t coded_bits) {
  if (coded_bits % 6 != 0)
    throw std::invalid_argument("info_length_for_coded: coded length not a multiple of 6");
  const std::size_t total = coded_bits / 6 * kPuncturePeriod;
  if (total <= kTail)
    throw std::invalid_argument("info_length_for_coded: codeword too short for the tail");
  return total - kTail;
}

std::vector<std::uint8_t> conv_encode(const std::vector<std::uint8_t>& info_bits) {
  const std::size_t total = info_bits.size() + kTail;
  if (total % kPuncturePeriod != 0)
    throw std::invalid_argument("conv_encode: info length + tail not a multiple of the puncture period");

  const auto& table = branch_table();
  std::vector<std::uint8_t> coded;
  coded.reserve(coded_length(info_bits.size()));
  unsigned state = 0;
  for (std::size_t t = 0; t < total; ++t) {
    const unsigned u = t < info_bits.size() ? (info_bits[t] & 1u) : 0u;
    const Branch& br = table[state][u];
    const std::size_t phase = t % kPuncturePeriod;
    if (kKeepA[phase]) coded.push_back(static_cast<std::uint8_t>(br.out_a));
    if (kKeepB[phase]) coded.push_back(static_cast<std::uint8_t>(br.out_b));
    state = br.next_state;
  }
  return coded;
}

std::vector<std::uint8_t> viterbi_decode_soft(const std::vector<double>& coded_llrs) {
  const std::size_t info_len = info_length_for_coded(coded_llrs.size());
  const std::size_t total = info_len + kTail;

  // Depuncture into per-step (A, B) metrics; missing positions contribute 0.
  std::vector<double> llr_a(total, 0.0), llr_b(total, 0.0);
  {
    std::size_t pos = 0;
    for (std::size_t t = 0; t < total; ++t) {
      const std::size_t phase = t % kPuncturePeriod;
      if (kKeepA[phase]) llr_a[t] = coded_llrs[pos++];
      if (kKeepB[phase]) llr_b[t] = coded_llrs[pos++];
    }
  }

  const auto& table = branch_table();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> metric(kStates, kNegInf), next_metric(kStates, kNegInf);
  metric[0] = 0.0;  // trellis starts in the all-zero state
  std::vector<std::uint8_t> decisions(total * kStates);

  for (std::size_t t = 0; t < total; ++t) {
    std::fill(next_metric.begin(), next_metric.end(), kNegInf);
    const double la = llr_a[t];
    const double lb = llr_b[t];
    // Branch metric lookup by (out_a, out_b).
    const double bm[4] = {-la - lb, -la + lb, la - lb, la + lb};
    std::uint8_t* dec = decisions.data() + t * kStates;
    const unsigned u_max = t < info_len ? 2u : 1u;  // tail forces zeros
    for (unsigned s = 0; s < kStates; ++s) {
      const double base = metric[s];
      if (base == kNegInf) continue;
      for (unsigned u = 0; u < u_max; ++u) {
        const Branch& br = table[s][u];
        const double m = base + bm[(br.out_a << 1) | br.out_b];
        if (m > next_metric[br.next_state]) {
          next_metric[br.next_state] = m;
          dec[br.next_state] = static_cast<std::uint8_t>((u << 6) | s);
        }
      }
    }
    metric.swap(next_metric);
  }

  // Traceback from the terminated all-zero state.
  std::vector<std::uint8_t> info(info_len);
  unsigned state = 0;
  for (std::size_t t = total; t-- > 0;) {
    const std::uint8_t d = decisions[t * kStates + state];
    const unsigned u = d >> 6;
    if (t < info_len) info[t] = static_cast<std::uint8_t>(u);
    state = d & (kStates - 1);
  }
  return info;
}

std::vector<std::size_t> make_interleaver(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i-- > 1;) {
    const std::size_t j = static_cast<std::size_t>(rng.next_unit() * (i + 1));
    std::swap(perm[i], perm[j > i ? i : j]);
  }
  return perm;
}

std::vector<std::uint8_t> interleave(const std::vector<std::uint8_t>& bits,
                                     const std::vector<std::size_t>& perm) {
  if (bits.size() != perm.size()) throw std::invalid_argument("interleave: size mismatch");
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out[j] = bits[perm[j]];
  return out;
}

std::vector<double> deinterleave_llrs(const std::vector<double>& stream_llrs,
                                      const std::vector<std::size_t>& perm) {
  if (stream_llrs.size() != perm.size())
    throw std::invalid_argument("deinterleave_llrs: size mismatch");
  std::vector<double> out(stream_llrs.size());
  for (std::size_t j = 0; j < perm.size(); ++j) out[perm[j]] = stream_llrs[j];
  return out;
}

}  // namespace cgmimo::phy
