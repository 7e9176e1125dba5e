// SPDX-License-Identifier: Apache-2.0
//
// Coded Monte-Carlo link harness: uplink detection and downlink precoding
// BLER sweeps over an SNR grid, plus the complexity/performance trade-off
// table. One block is one user's coded frame over all subcarriers of one
// OFDM frame; BLER is averaged over users. Trials are independent work units
// with their own random streams and operation tallies, so results do not
// depend on scheduling.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgmimo/constellation.hpp"
#include "cgmimo/detect.hpp"

namespace cgmimo::sim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Too many trials hit a solver breakdown (exit code 3 at the CLI).
struct BreakdownBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { kCholesky, kCg, kCgls, kNeumann };

Method parse_method(const std::string& name);  // chol | cg | cgls | neumann
std::string method_name(Method m);

// Frame geometry: the smallest number of OFDM symbols making the coded
// length divisible by the code's output granularity (1 for 64-QAM at 128
// subcarriers, 3 for QPSK/16-QAM).
struct FramePlan {
  std::size_t subcarriers = 0;
  std::size_t ofdm_symbols = 0;
  std::size_t bits_per_symbol = 0;
  std::size_t coded_bits = 0;
  std::size_t info_bits = 0;
  std::size_t symbols() const { return subcarriers * ofdm_symbols; }
};

FramePlan plan_frame(const phy::Constellation& c, std::size_t subcarriers);

struct SweepConfig {
  std::size_t bs_antennas = 32;
  std::size_t users = 8;
  phy::Modulation modulation = phy::Modulation::kQam64;
  Method method = Method::kCholesky;
  std::size_t iterations = 1;  // ignored by the Cholesky method
  double snr_start_db = 10.0;
  double snr_stop_db = 16.0;
  double snr_step_db = 2.0;
  std::size_t trials = 100;
  std::size_t subcarriers = 128;
  std::uint64_t seed = 1;
  std::string output_path;
  detect::SinrTracker tracker = detect::SinrTracker::kApprox;
  std::size_t threads = 0;  // 0: hardware concurrency
  double max_breakdown_fraction = 0.01;
  std::size_t max_block_errors = 0;  // optional early stop; 0 = fixed trials
};

void validate_config(const SweepConfig& cfg);
std::vector<double> snr_grid(const SweepConfig& cfg);

struct SnrPointResult {
  double snr_db = 0.0;
  std::uint64_t frames = 0;  // user blocks
  std::uint64_t block_errors = 0;
  double bler = 0.0;
  double bler_lo = 0.0;  // Wilson 95% interval
  double bler_hi = 0.0;
  double real_mults_mean = 0.0;  // per equalized subcarrier-symbol
  std::uint64_t breakdowns = 0;
  std::uint64_t trials_run = 0;
};

struct SweepResult {
  SweepConfig config;
  std::string direction;  // "uplink" | "downlink"
  std::vector<SnrPointResult> points;
};

SweepResult run_uplink_sweep(const SweepConfig& cfg);
SweepResult run_downlink_sweep(const SweepConfig& cfg);

// 95% Wilson score interval for errors/total.
std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t total);

void write_csv(const SweepResult& result, std::ostream& os);
void save_csv(const SweepResult& result, const std::string& path);

// SNR where the BLER curve crosses `target`, by log-BLER linear
// interpolation between adjacent grid points; nullopt when not bracketed.
std::optional<double> snr_at_target_bler(const SweepResult& result, double target);

struct TradeoffRow {
  std::string method_label;
  std::size_t iterations = 0;  // 0 for the direct method
  std::uint64_t real_mults = 0;
  std::optional<double> snr_db_at_target;
};

std::vector<TradeoffRow> tradeoff_table(const std::vector<SweepResult>& sweeps,
                                        double target_bler = 0.1);
void write_tradeoff_csv(const std::vector<TradeoffRow>& rows, double target_bler,
                        std::ostream& os);

}  // namespace cgmimo::sim
