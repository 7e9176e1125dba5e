// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "cgmimo/detect.hpp"
#include "cgmimo/opcount.hpp"
#include "cgmimo/rng.hpp"
#include "oracles.hpp"

using namespace cgmimo;
using opcount::DetectMethod;
using opcount::Stage;

namespace {

opcount::Tally instrumented_detect(DetectMethod method, std::size_t b, std::size_t u,
                                   std::size_t k) {
  phy::Rng rng(81);
  const auto h = oracles::random_matrix(b, u, rng);
  const auto y = oracles::random_vector(b, rng);
  const double n0 = 0.1, es = 1.0;
  const double rho_u = es / n0;
  const auto& c = phy::make_constellation(phy::Modulation::kQam16);

  opcount::Tally tally;
  {
    opcount::ScopedTally scope(tally);
    switch (method) {
      case DetectMethod::kCholesky:
        (void)detect::detect_cholesky(h, y, rho_u, n0, es, c);
        break;
      case DetectMethod::kCg:
        (void)detect::detect_cg(h, y, rho_u, n0, es, c, k, detect::SinrTracker::kApprox);
        break;
      case DetectMethod::kCgls:
        (void)detect::detect_cgls(h, y, rho_u, n0, es, c, k);
        break;
      case DetectMethod::kNeumann:
        (void)detect::detect_neumann(h, y, rho_u, n0, es, c, k);
        break;
    }
  }
  return tally;
}

}  // namespace

TEST_CASE("a length-1 complex dot product costs 4 real multiplications") {
  opcount::Tally tally;
  {
    opcount::ScopedTally scope(tally);
    const ComplexVector u = {cplx(1.0, 2.0)};
    const ComplexVector v = {cplx(0.5, -1.0)};
    (void)dot_h(u, v);
  }
  CHECK(tally.total() == 4);
}

TEST_CASE("closed-form crossovers against the direct method") {
  // U = 8: CG-D cheaper than Cholesky for K <= 5, independent of B.
  for (std::size_t b : {32u, 128u}) {
    const auto chol = opcount::count_detect(DetectMethod::kCholesky, b, 8, 1);
    CHECK(opcount::count_detect(DetectMethod::kCg, b, 8, 5) < chol);
    CHECK(opcount::count_detect(DetectMethod::kCg, b, 8, 6) >= chol);
  }
  // U = 16: crossover at K <= 12.
  for (std::size_t b : {32u, 128u}) {
    const auto chol = opcount::count_detect(DetectMethod::kCholesky, b, 16, 1);
    CHECK(opcount::count_detect(DetectMethod::kCg, b, 16, 12) < chol);
    CHECK(opcount::count_detect(DetectMethod::kCg, b, 16, 13) >= chol);
  }
}

TEST_CASE("instrumented tallies equal the closed forms stage by stage") {
  const std::size_t b = 32, u = 8;
  for (std::size_t k : {1u, 3u, 8u}) {
    for (auto method : {DetectMethod::kCg, DetectMethod::kCgls}) {
      const auto tally = instrumented_detect(method, b, u, k);
      const auto want = opcount::count_detect_stages(method, b, u, k);
      for (int s = 0; s < opcount::kStageCount; ++s) {
        INFO("method ", static_cast<int>(method), " k ", k, " stage ",
             opcount::stage_name(static_cast<Stage>(s)));
        CHECK(tally.get(static_cast<Stage>(s)) == want.by_stage[s]);
      }
    }
  }
  // Cholesky and Neumann: exact match as well (no bookkeeping delta).
  const auto chol = instrumented_detect(DetectMethod::kCholesky, b, u, 1);
  const auto chol_want = opcount::count_detect_stages(DetectMethod::kCholesky, b, u, 1);
  for (int s = 0; s < opcount::kStageCount; ++s)
    CHECK(chol.get(static_cast<Stage>(s)) == chol_want.by_stage[s]);
  for (std::size_t k : {1u, 2u, 4u}) {
    const auto neu = instrumented_detect(DetectMethod::kNeumann, b, u, k);
    const auto neu_want = opcount::count_detect_stages(DetectMethod::kNeumann, b, u, k);
    for (int s = 0; s < opcount::kStageCount; ++s)
      CHECK(neu.get(static_cast<Stage>(s)) == neu_want.by_stage[s]);
  }
}

TEST_CASE("neumann with one term only inverts the diagonal (divisions uncounted)") {
  const auto stages = opcount::count_detect_stages(DetectMethod::kNeumann, 32, 8, 1);
  CHECK(stages.by_stage[static_cast<int>(Stage::kNeumannTerm)] == 0);
}

TEST_CASE("gram stage count is linear in the antenna count") {
  const auto c32 = opcount::count_detect_stages(DetectMethod::kCg, 32, 8, 3);
  const auto c64 = opcount::count_detect_stages(DetectMethod::kCg, 64, 8, 3);
  CHECK(c64.by_stage[static_cast<int>(Stage::kGram)] ==
        2 * c32.by_stage[static_cast<int>(Stage::kGram)]);
}

TEST_CASE("iterative counts increase strictly with K") {
  for (auto method : {DetectMethod::kCg, DetectMethod::kCgls, DetectMethod::kNeumann}) {
    std::uint64_t prev = 0;
    for (std::size_t k = 1; k <= 10; ++k) {
      const auto total = opcount::count_detect(method, 32, 8, k);
      CHECK(total > prev);
      prev = total;
    }
  }
}

TEST_CASE("the diagonal tracker adds exactly U multiplications per iteration") {
  for (std::size_t k = 1; k < 8; ++k) {
    const auto lo = opcount::count_detect_stages(DetectMethod::kCg, 32, 8, k);
    const auto hi = opcount::count_detect_stages(DetectMethod::kCg, 32, 8, k + 1);
    const auto tracker_delta = hi.by_stage[static_cast<int>(Stage::kTracker)] -
                               lo.by_stage[static_cast<int>(Stage::kTracker)];
    CHECK(tracker_delta == 8);
    const auto cg_delta = hi.by_stage[static_cast<int>(Stage::kCgIteration)] -
                          lo.by_stage[static_cast<int>(Stage::kCgIteration)];
    CHECK(cg_delta == 4 * 8 * 8 + 12 * 8);
  }
}

TEST_CASE("cgls undercuts cg only for the first few iterations") {
  const std::pair<std::size_t, std::size_t> configs[] = {
      {32, 8}, {128, 8}, {32, 16}, {128, 16}};
  for (const auto& [b, u] : configs) {
    // cheaper somewhere at the start
    CHECK(opcount::count_detect(DetectMethod::kCgls, b, u, 1) <
          opcount::count_detect(DetectMethod::kCg, b, u, 1));
    // per-iteration cost is higher, so the advantage dies out by small K
    std::size_t crossover = 0;
    for (std::size_t k = 1; k <= 20; ++k) {
      if (opcount::count_detect(DetectMethod::kCgls, b, u, k) <
          opcount::count_detect(DetectMethod::kCg, b, u, k))
        crossover = k;
    }
    CHECK(crossover >= 1);
    CHECK(crossover <= 6);
    // and stays worse afterwards
    CHECK(opcount::count_detect(DetectMethod::kCgls, b, u, crossover + 1) >=
          opcount::count_detect(DetectMethod::kCg, b, u, crossover + 1));
  }
}
