// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cgmimo/opcount.hpp"
#include "cgmimo/sim.hpp"
#include "oracles.hpp"

using namespace cgmimo;
using sim::Method;
using sim::SweepConfig;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.bs_antennas = 32;
  cfg.users = 8;
  cfg.modulation = phy::Modulation::kQam64;
  cfg.method = Method::kCholesky;
  cfg.snr_start_db = 12.0;
  cfg.snr_stop_db = 13.0;
  cfg.snr_step_db = 1.0;
  cfg.trials = 60;
  cfg.seed = 7;
  return cfg;
}

std::string csv_body(const sim::SweepResult& result) {
  std::ostringstream os;
  sim::write_csv(result, os);
  const std::string full = os.str();
  // drop the '#' metadata prologue; the body starts at the header row
  const auto pos = full.find("snr_db,");
  return full.substr(pos);
}

}  // namespace

TEST_CASE("config validation rejects bad setups") {
  SweepConfig cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(sim::validate_config(cfg), sim::ConfigError);
  cfg = small_config();
  cfg.users = 40;  // exceeds antennas
  CHECK_THROWS_AS(sim::validate_config(cfg), sim::ConfigError);
  cfg = small_config();
  cfg.snr_step_db = 0.0;
  CHECK_THROWS_AS(sim::validate_config(cfg), sim::ConfigError);
  cfg = small_config();
  cfg.iterations = 0;
  CHECK_THROWS_AS(sim::validate_config(cfg), sim::ConfigError);
  CHECK_NOTHROW(sim::validate_config(small_config()));
}

TEST_CASE("wilson intervals track the exact binomial interval") {
  for (std::uint64_t n : {1000u, 10000u}) {
    const std::vector<std::uint64_t> ks = {10, 37, 100, n / 2, n - 10};
    for (std::uint64_t k : ks) {
      const auto [wlo, whi] = sim::wilson_interval(k, n);
      const auto [clo, chi] = oracles::clopper_pearson(k, n);
      INFO("n ", n, " k ", k);
      CHECK(clo >= wlo - 1e-3);
      CHECK(chi <= whi + 1e-3);
    }
  }
  // degenerate edges stay in [0, 1]
  const auto [lo0, hi0] = sim::wilson_interval(0, 100);
  CHECK(lo0 == 0.0);
  CHECK(hi0 < 0.05);
  const auto [lo1, hi1] = sim::wilson_interval(100, 100);
  CHECK(hi1 == 1.0);
}

TEST_CASE("high-snr sweep is error free") {
  SweepConfig cfg = small_config();
  cfg.bs_antennas = 128;
  cfg.snr_start_db = cfg.snr_stop_db = 60.0;
  cfg.trials = 100;
  const auto result = sim::run_uplink_sweep(cfg);
  REQUIRE(result.points.size() == 1);
  CHECK(result.points[0].block_errors == 0);
  CHECK(result.points[0].bler == 0.0);
  CHECK(result.points[0].frames == 800);
}

TEST_CASE("sweeps are deterministic byte for byte") {
  SweepConfig cfg = small_config();
  cfg.trials = 40;
  cfg.threads = 2;
  const auto a = sim::run_uplink_sweep(cfg);
  const auto b = sim::run_uplink_sweep(cfg);
  CHECK(csv_body(a) == csv_body(b));

  cfg.threads = 1;  // fold is scheduling independent
  const auto c = sim::run_uplink_sweep(cfg);
  CHECK(csv_body(a) == csv_body(c));
}

TEST_CASE("cg at K = U with the exact tracker reproduces cholesky trial outcomes") {
  SweepConfig chol = small_config();
  chol.trials = 120;

  SweepConfig cg = chol;
  cg.method = Method::kCg;
  cg.iterations = cg.users;
  cg.tracker = detect::SinrTracker::kExact;

  const auto a = sim::run_uplink_sweep(chol);
  const auto b = sim::run_uplink_sweep(cg);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].block_errors == b.points[i].block_errors);
    CHECK(a.points[i].frames == b.points[i].frames);
  }
}

TEST_CASE("downlink: cg precoding at K = U reproduces explicit precoding outcomes") {
  SweepConfig chol = small_config();
  chol.trials = 80;
  chol.snr_start_db = 16.0;
  chol.snr_stop_db = 17.0;

  SweepConfig cg = chol;
  cg.method = Method::kCg;
  cg.iterations = cg.users;

  const auto a = sim::run_downlink_sweep(chol);
  const auto b = sim::run_downlink_sweep(cg);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i)
    CHECK(a.points[i].block_errors == b.points[i].block_errors);
}

TEST_CASE("early stop cuts the trial count deterministically") {
  SweepConfig cfg = small_config();
  cfg.snr_start_db = cfg.snr_stop_db = 10.0;  // essentially every block errs
  cfg.trials = 400;
  cfg.max_block_errors = 25;
  const auto result = sim::run_uplink_sweep(cfg);
  REQUIRE(result.points.size() == 1);
  CHECK(result.points[0].trials_run < 400);
  CHECK(result.points[0].block_errors >= 25);
  const auto again = sim::run_uplink_sweep(cfg);
  CHECK(result.points[0].trials_run == again.points[0].trials_run);
  CHECK(result.points[0].block_errors == again.points[0].block_errors);
}

TEST_CASE("snr interpolation at a target bler") {
  sim::SweepResult curve;
  curve.config = small_config();
  curve.direction = "uplink";
  auto mk = [](double snr, double bler) {
    sim::SnrPointResult p;
    p.snr_db = snr;
    p.bler = bler;
    p.frames = 1000;
    return p;
  };
  curve.points = {mk(4.0, 0.8), mk(5.0, 0.3), mk(6.0, 0.02)};
  const auto snr = sim::snr_at_target_bler(curve, 0.1);
  REQUIRE(snr.has_value());
  CHECK(*snr > 5.0);
  CHECK(*snr < 6.0);
  // log-linear interpolation: 5 + (ln .3 - ln .1)/(ln .3 - ln .02)
  const double want = 5.0 + (std::log(0.3) - std::log(0.1)) / (std::log(0.3) - std::log(0.02));
  CHECK(*snr == doctest::Approx(want).epsilon(1e-12));

  // exact hit returns the grid point
  curve.points = {mk(4.0, 0.8), mk(5.0, 0.1), mk(6.0, 0.01)};
  CHECK(*sim::snr_at_target_bler(curve, 0.1) == 5.0);

  // non-bracketing curves yield nothing
  curve.points = {mk(4.0, 0.9), mk(5.0, 0.8)};
  CHECK(!sim::snr_at_target_bler(curve, 0.1).has_value());
}

TEST_CASE("tradeoff table joins complexity with interpolated snr") {
  SweepConfig chol = small_config();
  chol.trials = 150;
  chol.snr_start_db = 11.0;
  chol.snr_stop_db = 14.0;
  chol.snr_step_db = 1.0;

  SweepConfig cg = chol;
  cg.method = Method::kCg;
  cg.iterations = cg.users;  // K = U with the exact tracker: identical outcomes
  cg.tracker = detect::SinrTracker::kExact;

  std::vector<sim::SweepResult> sweeps;
  sweeps.push_back(sim::run_uplink_sweep(chol));
  sweeps.push_back(sim::run_uplink_sweep(cg));
  const auto rows = sim::tradeoff_table(sweeps, 0.1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method_label == "chol");
  CHECK(rows[1].method_label == "cg");
  CHECK(rows[0].real_mults ==
        opcount::count_detect(opcount::DetectMethod::kCholesky, 32, 8, 1));
  REQUIRE(rows[0].snr_db_at_target.has_value());
  REQUIRE(rows[1].snr_db_at_target.has_value());
  CHECK(std::abs(*rows[0].snr_db_at_target - *rows[1].snr_db_at_target) <= 0.1);

  std::ostringstream os;
  sim::write_tradeoff_csv(rows, 0.1, os);
  CHECK(os.str().find("method,iters,real_mults,snr_db_at_target") != std::string::npos);
}

TEST_CASE("csv format carries the mandated columns and metadata") {
  SweepConfig cfg = small_config();
  cfg.trials = 5;
  cfg.snr_stop_db = cfg.snr_start_db;
  const auto result = sim::run_uplink_sweep(cfg);
  std::ostringstream os;
  sim::write_csv(result, os);
  const std::string text = os.str();
  CHECK(text.rfind("# cgmimo sweep", 0) == 0);
  CHECK(text.find("snr_db,frames,block_errors,bler,bler_lo,bler_hi,real_mults_mean\n") !=
        std::string::npos);
  CHECK(text.find("# bs=32 users=8 mod=64qam method=chol") != std::string::npos);
}
