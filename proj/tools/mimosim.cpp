// SPDX-License-Identifier: Apache-2.0
//
// mimosim: link-level Monte-Carlo simulator for soft-output MMSE detection
// and MMSE precoding in the massive MIMO uplink/downlink.
//
//   mimosim uplink   --bs 128 --users 8 --mod 64qam --method cg --iters 3 \
//                    --snr 4:8:0.5 --trials 1000 --seed 1 --out bler.csv
//   mimosim downlink ...                (same flags, precoding methods)
//   mimosim tradeoff --kmax 8 ...       (SNR @ 10% BLER vs multiplication count)
//   mimosim count    --bs 32 --users 8 --iters 20 --out counts.csv
//
// Exit codes: 0 success, 2 configuration error, 3 breakdown budget exceeded.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgmimo/opcount.hpp"
#include "cgmimo/sim.hpp"

namespace {

using cgmimo::sim::SweepConfig;

struct CliOptions {
  SweepConfig cfg;
  std::string modulation = "64qam";
  std::string method = "chol";
  std::string snr_spec = "10:16:2";
  std::string tracker = "approx";
  std::string out_path;
  std::size_t kmax = 8;
};

void parse_snr_spec(const std::string& spec, SweepConfig& cfg) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> a)) throw cgmimo::sim::ConfigError("bad --snr spec: " + spec);
  if (in >> c1 >> b) {
    if (c1 != ':') throw cgmimo::sim::ConfigError("bad --snr spec: " + spec);
    if (in >> c2 >> step) {
      if (c2 != ':') throw cgmimo::sim::ConfigError("bad --snr spec: " + spec);
    } else {
      step = 1.0;
    }
  } else {
    b = a;
    step = 1.0;
  }
  cfg.snr_start_db = a;
  cfg.snr_stop_db = b;
  cfg.snr_step_db = step;
}

void add_common_flags(CLI::App* app, CliOptions& opt) {
  app->add_option("--bs", opt.cfg.bs_antennas, "base-station antennas B");
  app->add_option("--users", opt.cfg.users, "single-antenna users U");
  app->add_option("--mod", opt.modulation, "modulation: qpsk|16qam|64qam");
  app->add_option("--iters", opt.cfg.iterations, "iterations / series terms K");
  app->add_option("--snr", opt.snr_spec, "SNR grid start:stop:step in dB");
  app->add_option("--trials", opt.cfg.trials, "Monte-Carlo trials per SNR point");
  app->add_option("--subcarriers", opt.cfg.subcarriers, "OFDM subcarriers");
  app->add_option("--seed", opt.cfg.seed, "random seed");
  app->add_option("--threads", opt.cfg.threads, "worker threads (0 = auto)");
  app->add_option("--out", opt.out_path, "output CSV path (default stdout)");
  app->set_config("--config", "", "key=value config file (flags override)");
}

void finalize_config(CliOptions& opt) {
  opt.cfg.modulation = cgmimo::phy::parse_modulation(opt.modulation);
  opt.cfg.method = cgmimo::sim::parse_method(opt.method);
  if (opt.tracker == "exact") {
    opt.cfg.tracker = cgmimo::detect::SinrTracker::kExact;
  } else if (opt.tracker == "approx") {
    opt.cfg.tracker = cgmimo::detect::SinrTracker::kApprox;
  } else {
    throw cgmimo::sim::ConfigError("unknown tracker: " + opt.tracker);
  }
  parse_snr_spec(opt.snr_spec, opt.cfg);
  opt.cfg.output_path = opt.out_path;
}

void emit(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  os << body;
}

void report_progress(const cgmimo::sim::SweepResult& result) {
  for (const auto& p : result.points)
    std::fprintf(stderr, "[%s %s] snr=%.2f dB  bler=%.4g (%llu/%llu)\n",
                 result.direction.c_str(),
                 cgmimo::sim::method_name(result.config.method).c_str(), p.snr_db, p.bler,
                 static_cast<unsigned long long>(p.block_errors),
                 static_cast<unsigned long long>(p.frames));
}

int run_sweep(CliOptions& opt, bool uplink) {
  finalize_config(opt);
  const auto result = uplink ? cgmimo::sim::run_uplink_sweep(opt.cfg)
                             : cgmimo::sim::run_downlink_sweep(opt.cfg);
  report_progress(result);
  std::ostringstream body;
  cgmimo::sim::write_csv(result, body);
  emit(opt.out_path, body.str());
  return 0;
}

int run_tradeoff(CliOptions& opt, bool uplink) {
  finalize_config(opt);
  std::vector<cgmimo::sim::SweepResult> sweeps;

  SweepConfig cfg = opt.cfg;
  cfg.method = cgmimo::sim::Method::kCholesky;
  sweeps.push_back(uplink ? cgmimo::sim::run_uplink_sweep(cfg)
                          : cgmimo::sim::run_downlink_sweep(cfg));
  report_progress(sweeps.back());
  for (std::size_t k = 1; k <= opt.kmax; ++k) {
    cfg.method = opt.cfg.method == cgmimo::sim::Method::kCholesky
                     ? cgmimo::sim::Method::kCg
                     : opt.cfg.method;
    cfg.iterations = k;
    sweeps.push_back(uplink ? cgmimo::sim::run_uplink_sweep(cfg)
                            : cgmimo::sim::run_downlink_sweep(cfg));
    report_progress(sweeps.back());
  }

  const auto rows = cgmimo::sim::tradeoff_table(sweeps, 0.1);
  std::ostringstream body;
  cgmimo::sim::write_tradeoff_csv(rows, 0.1, body);
  emit(opt.out_path, body.str());
  return 0;
}

int run_count(const CliOptions& opt) {
  using cgmimo::opcount::DetectMethod;
  std::ostringstream body;
  body << "# real multiplications per soft-output equalization\n";
  body << "method,iters,real_mults\n";
  char line[96];
  std::snprintf(line, sizeof line, "chol,0,%llu\n",
                static_cast<unsigned long long>(cgmimo::opcount::count_detect(
                    DetectMethod::kCholesky, opt.cfg.bs_antennas, opt.cfg.users, 1)));
  body << line;
  const struct { const char* name; DetectMethod m; } iterative[] = {
      {"cg", DetectMethod::kCg},
      {"cgls", DetectMethod::kCgls},
      {"neumann", DetectMethod::kNeumann},
  };
  for (const auto& entry : iterative) {
    for (std::size_t k = 1; k <= opt.cfg.iterations; ++k) {
      std::snprintf(line, sizeof line, "%s,%zu,%llu\n", entry.name, k,
                    static_cast<unsigned long long>(cgmimo::opcount::count_detect(
                        entry.m, opt.cfg.bs_antennas, opt.cfg.users, k)));
      body << line;
    }
  }
  emit(opt.out_path, body.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"massive MIMO soft-output detection / precoding simulator"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* uplink = app.add_subcommand("uplink", "uplink detection BLER sweep");
  auto* downlink = app.add_subcommand("downlink", "downlink precoding BLER sweep");
  auto* tradeoff = app.add_subcommand("tradeoff", "SNR@10%-BLER vs complexity table");
  auto* count = app.add_subcommand("count", "closed-form multiplication counts");

  for (auto* sub : {uplink, downlink, tradeoff}) {
    add_common_flags(sub, opt);
    sub->add_option("--method", opt.method, "chol|cg|cgls|neumann");
    sub->add_option("--tracker", opt.tracker, "cg SINR tracker: approx|exact");
    sub->add_option("--max-errors", opt.cfg.max_block_errors,
                    "stop a point early after this many block errors (0 = off)");
  }
  tradeoff->add_option("--kmax", opt.kmax, "largest iteration count in the table");
  count->add_option("--bs", opt.cfg.bs_antennas, "base-station antennas B");
  count->add_option("--users", opt.cfg.users, "single-antenna users U");
  count->add_option("--iters", opt.cfg.iterations, "table rows up to this K");
  count->add_option("--out", opt.out_path, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(uplink)) return run_sweep(opt, true);
    if (app.got_subcommand(downlink)) return run_sweep(opt, false);
    if (app.got_subcommand(tradeoff)) return run_tradeoff(opt, true);
    if (app.got_subcommand(count)) return run_count(opt);
  } catch (const cgmimo::sim::BreakdownBudgetExceeded& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const cgmimo::sim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
