// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "cgmimo/channel.hpp"
#include "cgmimo/coding.hpp"
#include "cgmimo/constellation.hpp"
#include "cgmimo/sim.hpp"
#include "oracles.hpp"

using namespace cgmimo;
using phy::Modulation;

TEST_CASE("constellations are unit energy with the documented geometry") {
  for (auto kind : {Modulation::kQpsk, Modulation::kQam16, Modulation::kQam64}) {
    const auto c = phy::make_constellation(kind);
    CHECK(c.symbol_energy == doctest::Approx(1.0).epsilon(1e-12));
    double measured = 0.0;
    for (const auto& p : c.points) measured += std::norm(p);
    CHECK(measured / c.points.size() == doctest::Approx(1.0).epsilon(1e-12));
  }

  const auto qpsk = phy::make_constellation(Modulation::kQpsk);
  const double s = 1.0 / std::sqrt(2.0);
  std::set<std::pair<double, double>> want = {{-s, -s}, {-s, s}, {s, -s}, {s, s}};
  for (const auto& p : qpsk.points) {
    CHECK(want.count({p.real(), p.imag()}) == 1);
  }

  const auto qam16 = phy::make_constellation(Modulation::kQam16);
  const double q = 1.0 / std::sqrt(10.0);
  CHECK(qam16.points[0] == cplx(-3 * q, -3 * q));   // label 0000
  CHECK(qam16.points[0b1010] == cplx(3 * q, 3 * q));
  CHECK(qam16.points[0b0111] == cplx(-1 * q, 1 * q));
}

TEST_CASE("gray labeling: nearest neighbors differ in exactly one bit") {
  for (auto kind : {Modulation::kQam16, Modulation::kQam64}) {
    const auto c = phy::make_constellation(kind);
    double dmin = 1e300;
    for (std::size_t a = 0; a < c.points.size(); ++a)
      for (std::size_t b = a + 1; b < c.points.size(); ++b)
        dmin = std::min(dmin, std::abs(c.points[a] - c.points[b]));
    for (std::size_t a = 0; a < c.points.size(); ++a)
      for (std::size_t b = a + 1; b < c.points.size(); ++b) {
        if (std::abs(c.points[a] - c.points[b]) < dmin * 1.001) {
          CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
        }
      }
  }
}

TEST_CASE("map then hard demap is the identity") {
  for (auto kind : {Modulation::kQpsk, Modulation::kQam16, Modulation::kQam64}) {
    const auto c = phy::make_constellation(kind);
    for (unsigned label = 0; label < c.points.size(); ++label) {
      CHECK(phy::hard_demap(c.points[label], c) == label);
    }
    // bit-level round trip
    std::vector<std::uint8_t> bits;
    for (unsigned label = 0; label < c.points.size(); ++label)
      for (int b = c.bits_per_symbol - 1; b >= 0; --b)
        bits.push_back((label >> b) & 1u);
    const auto symbols = phy::map_bits(bits, c);
    for (unsigned label = 0; label < c.points.size(); ++label)
      CHECK(phy::hard_demap(symbols[label], c) == label);
  }
  const auto c = phy::make_constellation(Modulation::kQam16);
  CHECK_THROWS_AS((void)phy::map_bits(std::vector<std::uint8_t>(3, 0), c),
                  std::invalid_argument);
}

TEST_CASE("rayleigh channel statistics and determinism") {
  phy::Rng rng(41);
  double power = 0.0;
  cplx cross(0.0, 0.0);
  std::size_t count = 0;
  for (int rep = 0; rep < 100; ++rep) {
    auto r = rng.fork(rep);
    const auto h = phy::rayleigh_channel(128, 8, r);
    for (std::size_t i = 0; i < 128; ++i)
      for (std::size_t j = 0; j < 8; ++j) power += std::norm(h(i, j));
    for (std::size_t i = 0; i < 128; ++i) cross += h(i, 0) * std::conj(h(i, 1));
    count += 128 * 8;
  }
  CHECK(power / count == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(cross) / (100.0 * 128.0) < 0.02);

  auto r1 = phy::Rng(99).fork(5);
  auto r2 = phy::Rng(99).fork(5);
  const auto h1 = phy::rayleigh_channel(16, 4, r1);
  const auto h2 = phy::rayleigh_channel(16, 4, r2);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(h1(i, j) == h2(i, j));
}

TEST_CASE("uplink transmission model") {
  phy::Rng rng(42);
  const auto h = oracles::random_matrix(6, 3, rng);
  const auto x = oracles::random_vector(3, rng);

  auto r0 = rng.fork(1);
  const auto clean = phy::transmit_uplink(h, x, 0.0, r0);
  const auto want = matvec(h, x);
  for (std::size_t i = 0; i < 6; ++i) CHECK(clean[i] == want[i]);

  // x = 0: pure noise with the configured variance.
  const double n0 = 0.8;
  double measured = 0.0;
  std::size_t count = 0;
  const ComplexVector zero(3, cplx(0.0, 0.0));
  for (int rep = 0; rep < 20000; ++rep) {
    auto r = rng.fork(1000 + rep);
    const auto y = phy::transmit_uplink(h, zero, n0, r);
    for (const auto& v : y) measured += std::norm(v);
    count += y.size();
  }
  CHECK(measured / count == doctest::Approx(n0).epsilon(0.03));

  ComplexVector e1 = {cplx(1, 0), cplx(0, 0), cplx(0, 0)};
  auto r1 = rng.fork(2);
  const auto ident = phy::transmit_uplink(ComplexMatrix::identity(3), e1, 0.0, r1);
  CHECK(ident[0] == cplx(1, 0));
  CHECK(ident[1] == cplx(0, 0));
}

TEST_CASE("downlink transmission mirrors the uplink with reciprocity") {
  phy::Rng rng(43);
  const auto h_u = oracles::random_matrix(8, 4, rng);
  const auto h_d = hermitian_of(h_u);
  const auto s = oracles::random_vector(8, rng);
  auto r = rng.fork(1);
  const auto y = phy::transmit_downlink(h_d, s, 0.0, r);
  const auto want = matvec(h_d, s);
  CHECK(y.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == want[i]);
}

TEST_CASE("snr bookkeeping: N0 = U Es / SNR_linear") {
  CHECK(phy::uplink_noise_variance(10.0 * std::log10(8.0), 8) == doctest::Approx(1.0));
  CHECK(phy::uplink_noise_variance(0.0, 4) == doctest::Approx(4.0));
  CHECK(phy::downlink_noise_variance(10.0) == doctest::Approx(0.1));
}

TEST_CASE("convolutional code: linearity, lengths, reference encoder") {
  const std::vector<std::uint8_t> zeros(119, 0);  // 119 + 6 = 125 = 25 * 5
  const auto coded = phy::conv_encode(zeros);
  CHECK(coded.size() == 150);
  CHECK(phy::coded_length(119) == 150);
  CHECK(phy::info_length_for_coded(150) == 119);
  for (auto b : coded) CHECK(b == 0);

  CHECK_THROWS_AS((void)phy::conv_encode(std::vector<std::uint8_t>(10, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)phy::viterbi_decode_soft(std::vector<double>(100, 0.0)),
                  std::invalid_argument);

  // Against the direct-formula mother encoder + puncturing.
  phy::Rng rng(44);
  std::vector<std::uint8_t> info(54);  // 54 + 6 = 60
  for (auto& b : info) b = rng.next_u64() & 1;
  auto with_tail = info;
  with_tail.resize(info.size() + 6, 0);
  const auto [ma, mb] = oracles::mother_encode_reference(with_tail);
  const int keep_a[5] = {1, 1, 0, 1, 0};
  const int keep_b[5] = {1, 0, 1, 0, 1};
  std::vector<std::uint8_t> want;
  for (std::size_t t = 0; t < with_tail.size(); ++t) {
    if (keep_a[t % 5]) want.push_back(static_cast<std::uint8_t>(ma[t]));
    if (keep_b[t % 5]) want.push_back(static_cast<std::uint8_t>(mb[t]));
  }
  CHECK(phy::conv_encode(info) == want);
}

TEST_CASE("viterbi round trips and corrects a single flipped bit") {
  phy::Rng rng(45);
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<std::uint8_t> info(119);
    for (auto& b : info) b = rng.next_u64() & 1;
    const auto coded = phy::conv_encode(info);

    std::vector<double> llrs(coded.size());
    for (std::size_t i = 0; i < coded.size(); ++i) llrs[i] = coded[i] ? 64.0 : -64.0;
    CHECK(phy::viterbi_decode_soft(llrs) == info);

    // one flipped coded bit stays within the free distance
    auto noisy = llrs;
    const std::size_t flip = rng.next_u64() % coded.size();
    noisy[flip] = -noisy[flip];
    CHECK(phy::viterbi_decode_soft(noisy) == info);
  }
}

TEST_CASE("interleaver is a bijection and inverts") {
  phy::Rng rng(46);
  auto perm_rng = rng.fork(0);
  const auto perm = phy::make_interleaver(257, perm_rng);
  std::set<std::size_t> seen(perm.begin(), perm.end());
  CHECK(seen.size() == 257);
  CHECK(*seen.rbegin() == 256);

  std::vector<std::uint8_t> bits(257);
  for (auto& b : bits) b = rng.next_u64() & 1;
  const auto inter = phy::interleave(bits, perm);
  // route a copy of the bit values back through the llr deinterleaver
  std::vector<double> as_llr(inter.begin(), inter.end());
  const auto restored = phy::deinterleave_llrs(as_llr, perm);
  for (std::size_t i = 0; i < bits.size(); ++i)
    CHECK(restored[i] == static_cast<double>(bits[i]));
}

TEST_CASE("frame plans cover all modulations at 128 subcarriers") {
  using sim::plan_frame;
  const auto p64 = plan_frame(phy::make_constellation(Modulation::kQam64), 128);
  CHECK(p64.ofdm_symbols == 1);
  CHECK(p64.coded_bits == 768);
  CHECK(p64.info_bits == 634);

  const auto p16 = plan_frame(phy::make_constellation(Modulation::kQam16), 128);
  CHECK(p16.ofdm_symbols == 3);
  CHECK(p16.coded_bits == 1536);
  CHECK(p16.info_bits == 1274);

  const auto pq = plan_frame(phy::make_constellation(Modulation::kQpsk), 128);
  CHECK(pq.ofdm_symbols == 3);
  CHECK(pq.coded_bits == 768);
  CHECK(pq.info_bits == 634);
}

TEST_CASE("coded frame length bookkeeping") {
  // coded = 6 (info + 6) / 5 for clean puncturing periods
  for (std::size_t info : {119u, 634u, 1274u}) {
    CHECK(phy::coded_length(info) == 6 * (info + 6) / 5);
  }
}
