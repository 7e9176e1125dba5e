// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <thread>

#include "cgmimo/channel.hpp"
#include "cgmimo/coding.hpp"
#include "cgmimo/opcount.hpp"
#include "cgmimo/precode.hpp"
#include "cgmimo/solvers.hpp"

namespace cgmimo::sim {

Method parse_method(const std::string& name) {
  if (name == "chol") return Method::kCholesky;
  if (name == "cg") return Method::kCg;
  if (name == "cgls") return Method::kCgls;
  if (name == "neumann") return Method::kNeumann;
  throw ConfigError("unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kCholesky: return "chol";
    case Method::kCg: return "cg";
    case Method::kCgls: return "cgls";
    case Method::kNeumann: return "neumann";
  }
  return "?";
}

FramePlan plan_frame(const phy::Constellation& c, std::size_t subcarriers) {
  FramePlan plan;
  plan.subcarriers = subcarriers;
  plan.bits_per_symbol = static_cast<std::size_t>(c.bits_per_symbol);
  for (std::size_t s = 1; s <= 6; ++s) {
    if ((subcarriers * plan.bits_per_symbol * s) % 6 == 0) {
      plan.ofdm_symbols = s;
      break;
    }
  }
  plan.coded_bits = subcarriers * plan.bits_per_symbol * plan.ofdm_symbols;
  plan.info_bits = phy::info_length_for_coded(plan.coded_bits);
  return plan;
}

void validate_config(const SweepConfig& cfg) {
  if (cfg.users < 1 || cfg.bs_antennas < cfg.users)
    throw ConfigError("need bs_antennas >= users >= 1");
  if (cfg.snr_step_db <= 0.0) throw ConfigError("snr step must be positive");
  if (cfg.snr_stop_db < cfg.snr_start_db - 1e-12)
    throw ConfigError("snr stop must not precede snr start");
  if (cfg.trials < 1) throw ConfigError("need at least one trial");
  if (cfg.subcarriers < 1) throw ConfigError("need at least one subcarrier");
  if (cfg.iterations < 1) throw ConfigError("need at least one iteration");
  if (cfg.max_breakdown_fraction < 0.0 || cfg.max_breakdown_fraction > 1.0)
    throw ConfigError("breakdown fraction must lie in [0, 1]");
  try {
    plan_frame(phy::make_constellation(cfg.modulation), cfg.subcarriers);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("frame does not fit the code: ") + e.what());
  }
}

std::vector<double> snr_grid(const SweepConfig& cfg) {
  std::vector<double> grid;
  for (double s = cfg.snr_start_db; s <= cfg.snr_stop_db + 1e-9; s += cfg.snr_step_db)
    grid.push_back(s);
  return grid;
}

std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t total) {
  if (total == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = std::max(0.0, center - half);
  double hi = std::min(1.0, center + half);
  if (errors == 0) lo = 0.0;
  if (errors == total) hi = 1.0;
  return {lo, hi};
}

namespace {

struct TrialOutcome {
  std::uint32_t user_errors = 0;
  bool breakdown = false;
  std::uint64_t real_mults = 0;
  std::uint64_t equalize_calls = 0;
};

struct UserFrame {
  std::vector<std::uint8_t> info;
  std::vector<std::size_t> perm;
  std::vector<cplx> symbols;
};

UserFrame make_user_frame(const phy::Constellation& c, const FramePlan& plan,
                          phy::Rng bit_rng, phy::Rng il_rng) {
  UserFrame f;
  f.info.resize(plan.info_bits);
  for (auto& bit : f.info) bit = static_cast<std::uint8_t>(bit_rng.next_u64() & 1u);
  const auto coded = phy::conv_encode(f.info);
  f.perm = phy::make_interleaver(coded.size(), il_rng);
  f.symbols = phy::map_bits(phy::interleave(coded, f.perm), c);
  return f;
}

detect::SoftOutput equalize(const SweepConfig& cfg, const ComplexMatrix& h,
                            const ComplexVector& y, double rho_u, double n0,
                            const phy::Constellation& c) {
  switch (cfg.method) {
    case Method::kCholesky:
      return detect::detect_cholesky(h, y, rho_u, n0, 1.0, c);
    case Method::kCg:
      return detect::detect_cg(h, y, rho_u, n0, 1.0, c, cfg.iterations, cfg.tracker);
    case Method::kCgls:
      return detect::detect_cgls(h, y, rho_u, n0, 1.0, c, cfg.iterations);
    case Method::kNeumann:
      return detect::detect_neumann(h, y, rho_u, n0, 1.0, c, cfg.iterations);
  }
  throw ConfigError("unknown method");
}

precode::PrecodeResult run_precoder(const SweepConfig& cfg, const ComplexMatrix& h_d,
                                    const ComplexVector& t, double rho_d) {
  switch (cfg.method) {
    case Method::kCholesky: return precode::precode_explicit(h_d, t, rho_d);
    case Method::kCg: return precode::precode_cg(h_d, t, rho_d, cfg.iterations);
    case Method::kCgls: return precode::precode_cgls(h_d, t, rho_d, cfg.iterations);
    case Method::kNeumann: return precode::precode_neumann(h_d, t, rho_d, cfg.iterations);
  }
  throw ConfigError("unknown method");
}

TrialOutcome run_uplink_trial(const SweepConfig& cfg, const phy::Constellation& c,
                              const FramePlan& plan, double n0, double rho_u,
                              phy::Rng trial_rng) {
  const std::size_t users = cfg.users;
  auto bits_rng = trial_rng.fork(1);
  auto chan_rng = trial_rng.fork(2);
  auto noise_rng = trial_rng.fork(3);
  auto il_rng = trial_rng.fork(4);

  std::vector<UserFrame> frames;
  frames.reserve(users);
  for (std::size_t u = 0; u < users; ++u)
    frames.push_back(make_user_frame(c, plan, bits_rng.fork(u), il_rng.fork(u)));

  std::vector<ComplexMatrix> channels;
  channels.reserve(plan.subcarriers);
  for (std::size_t sc = 0; sc < plan.subcarriers; ++sc) {
    auto rng = chan_rng.fork(sc);
    channels.push_back(phy::rayleigh_channel(cfg.bs_antennas, users, rng));
  }

  const std::size_t bps = plan.bits_per_symbol;
  std::vector<std::vector<double>> llr_stream(users, std::vector<double>(plan.coded_bits));
  opcount::Tally tally;
  TrialOutcome out;

  for (std::size_t sym = 0; sym < plan.ofdm_symbols; ++sym) {
    for (std::size_t sc = 0; sc < plan.subcarriers; ++sc) {
      const std::size_t sidx = sym * plan.subcarriers + sc;
      ComplexVector x(users);
      for (std::size_t u = 0; u < users; ++u) x[u] = frames[u].symbols[sidx];
      auto nrng = noise_rng.fork(sidx);
      const ComplexVector y = phy::transmit_uplink(channels[sc], x, n0, nrng);

      detect::SoftOutput det;
      try {
        opcount::ScopedTally scope(tally);
        det = equalize(cfg, channels[sc], y, rho_u, n0, c);
      } catch (const solvers::SolverBreakdown&) {
        out.breakdown = true;
        return out;
      }
      ++out.equalize_calls;
      for (std::size_t u = 0; u < users; ++u)
        for (std::size_t b = 0; b < bps; ++b)
          llr_stream[u][sidx * bps + b] = det.llrs[u][b];
    }
  }
  out.real_mults = tally.total();

  for (std::size_t u = 0; u < users; ++u) {
    const auto coded_llrs = phy::deinterleave_llrs(llr_stream[u], frames[u].perm);
    const auto decoded = phy::viterbi_decode_soft(coded_llrs);
    if (decoded != frames[u].info) ++out.user_errors;
  }
  return out;
}

TrialOutcome run_downlink_trial(const SweepConfig& cfg, const phy::Constellation& c,
                                const FramePlan& plan, double n0, double rho_d,
                                phy::Rng trial_rng) {
  const std::size_t users = cfg.users;
  auto bits_rng = trial_rng.fork(1);
  auto chan_rng = trial_rng.fork(2);
  auto noise_rng = trial_rng.fork(3);
  auto il_rng = trial_rng.fork(4);

  std::vector<UserFrame> frames;
  frames.reserve(users);
  for (std::size_t u = 0; u < users; ++u)
    frames.push_back(make_user_frame(c, plan, bits_rng.fork(u), il_rng.fork(u)));

  std::vector<ComplexMatrix> channels;
  channels.reserve(plan.subcarriers);
  for (std::size_t sc = 0; sc < plan.subcarriers; ++sc) {
    auto rng = chan_rng.fork(sc);
    channels.push_back(hermitian_of(phy::rayleigh_channel(cfg.bs_antennas, users, rng)));
  }

  const std::size_t bps = plan.bits_per_symbol;
  std::vector<std::vector<double>> llr_stream(users, std::vector<double>(plan.coded_bits));
  opcount::Tally tally;
  TrialOutcome out;
  const double noise_std = std::sqrt(0.5 * n0);

  for (std::size_t sym = 0; sym < plan.ofdm_symbols; ++sym) {
    for (std::size_t sc = 0; sc < plan.subcarriers; ++sc) {
      const std::size_t sidx = sym * plan.subcarriers + sc;
      ComplexVector t(users);
      for (std::size_t u = 0; u < users; ++u) t[u] = frames[u].symbols[sidx];

      precode::PrecodeResult pr;
      try {
        opcount::ScopedTally scope(tally);
        pr = run_precoder(cfg, channels[sc], t, rho_d);
      } catch (const solvers::SolverBreakdown&) {
        out.breakdown = true;
        return out;
      }
      ++out.equalize_calls;

      // Channel + per-user genie demapping: the user projects its noiseless
      // receive sample onto its own symbol to get the effective gain.
      const ComplexVector z = matvec(channels[sc], pr.transmit);
      auto nrng = noise_rng.fork(sidx);
      for (std::size_t u = 0; u < users; ++u) {
        const cplx noise(noise_std * nrng.next_gaussian(), noise_std * nrng.next_gaussian());
        const cplx y = z[u] + noise;
        const cplx gain = z[u] / t[u];
        std::vector<double> llrs;
        if (std::norm(gain) < 1e-24) {
          llrs.assign(bps, 0.0);
        } else {
          const double rho = std::norm(gain) / n0;
          llrs = detect::compute_llrs(y / gain, 1.0, rho, c);
        }
        for (std::size_t b = 0; b < bps; ++b) llr_stream[u][sidx * bps + b] = llrs[b];
      }
    }
  }
  out.real_mults = tally.total();

  for (std::size_t u = 0; u < users; ++u) {
    const auto coded_llrs = phy::deinterleave_llrs(llr_stream[u], frames[u].perm);
    const auto decoded = phy::viterbi_decode_soft(coded_llrs);
    if (decoded != frames[u].info) ++out.user_errors;
  }
  return out;
}

std::size_t effective_threads(const SweepConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs trials [begin, end) across the worker pool; outcomes land in
// trial-index order so the fold is scheduling independent.
template <typename Fn>
void run_range(std::size_t begin, std::size_t end, std::size_t nthreads,
               std::vector<TrialOutcome>& outcomes, const Fn& fn) {
  if (nthreads <= 1 || end - begin <= 1) {
    for (std::size_t t = begin; t < end; ++t) outcomes[t] = fn(t);
    return;
  }
  std::atomic<std::size_t> next{begin};
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= end) return;
      outcomes[t] = fn(t);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t spawn = std::min(nthreads, end - begin);
  pool.reserve(spawn);
  for (std::size_t i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

template <typename TrialFn>
SnrPointResult run_point(const SweepConfig& cfg, double snr_db, const TrialFn& fn) {
  const std::size_t nthreads = effective_threads(cfg);
  std::vector<TrialOutcome> outcomes(cfg.trials);

  std::size_t folded = cfg.trials;
  if (cfg.max_block_errors == 0) {
    run_range(0, cfg.trials, nthreads, outcomes, fn);
  } else {
    // Early stop: work in waves, then fold the completed prefix in trial
    // order until the error budget is reached. Trials past the cutoff are
    // discarded, so the result is independent of scheduling.
    const std::size_t wave = std::max<std::size_t>(16, 4 * nthreads);
    std::size_t done = 0;
    std::uint64_t errors_so_far = 0;
    folded = 0;
    while (done < cfg.trials) {
      const std::size_t end = std::min(cfg.trials, done + wave);
      run_range(done, end, nthreads, outcomes, fn);
      for (std::size_t t = done; t < end; ++t) {
        ++folded;
        if (!outcomes[t].breakdown) errors_so_far += outcomes[t].user_errors;
        if (errors_so_far >= cfg.max_block_errors) break;
      }
      done = end;
      if (errors_so_far >= cfg.max_block_errors) break;
    }
  }

  SnrPointResult point;
  point.snr_db = snr_db;
  point.trials_run = folded;
  std::uint64_t mults = 0, calls = 0;
  for (std::size_t t = 0; t < folded; ++t) {
    const TrialOutcome& o = outcomes[t];
    if (o.breakdown) {
      ++point.breakdowns;
      continue;
    }
    point.frames += cfg.users;
    point.block_errors += o.user_errors;
    mults += o.real_mults;
    calls += o.equalize_calls;
  }
  if (point.breakdowns > cfg.max_breakdown_fraction * static_cast<double>(folded))
    throw BreakdownBudgetExceeded("solver breakdowns exceeded the configured budget");
  point.bler = point.frames > 0
                   ? static_cast<double>(point.block_errors) / static_cast<double>(point.frames)
                   : 0.0;
  const auto interval = wilson_interval(point.block_errors, point.frames);
  point.bler_lo = interval.first;
  point.bler_hi = interval.second;
  point.real_mults_mean = calls > 0 ? static_cast<double>(mults) / static_cast<double>(calls) : 0.0;
  return point;
}

}  // namespace

SweepResult run_uplink_sweep(const SweepConfig& cfg) {
  validate_config(cfg);
  const auto c = phy::make_constellation(cfg.modulation);
  const auto plan = plan_frame(c, cfg.subcarriers);

  SweepResult result;
  result.config = cfg;
  result.direction = "uplink";
  const auto grid = snr_grid(cfg);
  const phy::Rng root(cfg.seed);
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const double n0 = phy::uplink_noise_variance(grid[pi], cfg.users);
    const double rho_u = 1.0 / n0;  // Es = 1
    const phy::Rng point_rng = root.fork(1).fork(pi);
    result.points.push_back(run_point(cfg, grid[pi], [&](std::size_t trial) {
      return run_uplink_trial(cfg, c, plan, n0, rho_u, point_rng.fork(trial));
    }));
  }
  return result;
}

SweepResult run_downlink_sweep(const SweepConfig& cfg) {
  validate_config(cfg);
  const auto c = phy::make_constellation(cfg.modulation);
  const auto plan = plan_frame(c, cfg.subcarriers);

  SweepResult result;
  result.config = cfg;
  result.direction = "downlink";
  const auto grid = snr_grid(cfg);
  const phy::Rng root(cfg.seed);
  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const double n0 = phy::downlink_noise_variance(grid[pi]);
    const double rho_d = 1.0 / n0;  // Es = 1
    const phy::Rng point_rng = root.fork(2).fork(pi);
    result.points.push_back(run_point(cfg, grid[pi], [&](std::size_t trial) {
      return run_downlink_trial(cfg, c, plan, n0, rho_d, point_rng.fork(trial));
    }));
  }
  return result;
}

namespace {

std::string timestamp_utc() {
  char buf[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_csv(const SweepResult& result, std::ostream& os) {
  const SweepConfig& cfg = result.config;
  char line[256];
  os << "# cgmimo sweep\n";
  os << "# direction=" << result.direction << "\n";
  std::snprintf(line, sizeof line,
                "# bs=%zu users=%zu mod=%s method=%s iters=%zu tracker=%s\n",
                cfg.bs_antennas, cfg.users, phy::modulation_name(cfg.modulation).c_str(),
                method_name(cfg.method).c_str(), cfg.iterations,
                cfg.tracker == detect::SinrTracker::kExact ? "exact" : "approx");
  os << line;
  std::snprintf(line, sizeof line,
                "# snr=%.4f:%.4f:%.4f trials=%zu subcarriers=%zu seed=%llu\n",
                cfg.snr_start_db, cfg.snr_stop_db, cfg.snr_step_db, cfg.trials,
                cfg.subcarriers, static_cast<unsigned long long>(cfg.seed));
  os << line;
  os << "# generated=" << timestamp_utc() << "\n";
  os << "snr_db,frames,block_errors,bler,bler_lo,bler_hi,real_mults_mean\n";
  for (const auto& p : result.points) {
    std::snprintf(line, sizeof line, "%.4f,%llu,%llu,%.9g,%.9g,%.9g,%.3f\n", p.snr_db,
                  static_cast<unsigned long long>(p.frames),
                  static_cast<unsigned long long>(p.block_errors), p.bler, p.bler_lo,
                  p.bler_hi, p.real_mults_mean);
    os << line;
  }
}

void save_csv(const SweepResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file: " + path);
  write_csv(result, os);
}

std::optional<double> snr_at_target_bler(const SweepResult& result, double target) {
  const auto& pts = result.points;
  for (const auto& p : pts)
    if (p.bler == target) return p.snr_db;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[i + 1];
    if (a.bler > target && b.bler < target) {
      // Log-linear in BLER; an exact zero on the right is floored at half an
      // error for the interpolation to stay defined.
      const double floor_b = 0.5 / std::max<double>(1.0, static_cast<double>(b.frames));
      const double b_bler = std::max(b.bler, floor_b);
      const double f = (std::log(a.bler) - std::log(target)) /
                       (std::log(a.bler) - std::log(b_bler));
      return a.snr_db + (b.snr_db - a.snr_db) * std::min(1.0, std::max(0.0, f));
    }
  }
  return std::nullopt;
}

std::vector<TradeoffRow> tradeoff_table(const std::vector<SweepResult>& sweeps,
                                        double target_bler) {
  std::vector<TradeoffRow> rows;
  rows.reserve(sweeps.size());
  for (const auto& sweep : sweeps) {
    TradeoffRow row;
    const Method m = sweep.config.method;
    row.method_label = method_name(m);
    row.iterations = m == Method::kCholesky ? 0 : sweep.config.iterations;
    opcount::DetectMethod dm = opcount::DetectMethod::kCholesky;
    switch (m) {
      case Method::kCholesky: dm = opcount::DetectMethod::kCholesky; break;
      case Method::kCg: dm = opcount::DetectMethod::kCg; break;
      case Method::kCgls: dm = opcount::DetectMethod::kCgls; break;
      case Method::kNeumann: dm = opcount::DetectMethod::kNeumann; break;
    }
    row.real_mults = opcount::count_detect(dm, sweep.config.bs_antennas,
                                           sweep.config.users, sweep.config.iterations);
    row.snr_db_at_target = snr_at_target_bler(sweep, target_bler);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_tradeoff_csv(const std::vector<TradeoffRow>& rows, double target_bler,
                        std::ostream& os) {
  char line[160];
  std::snprintf(line, sizeof line, "# cgmimo tradeoff target_bler=%.6g\n", target_bler);
  os << line;
  os << "method,iters,real_mults,snr_db_at_target\n";
  for (const auto& row : rows) {
    if (row.snr_db_at_target) {
      std::snprintf(line, sizeof line, "%s,%zu,%llu,%.4f\n", row.method_label.c_str(),
                    row.iterations, static_cast<unsigned long long>(row.real_mults),
                    *row.snr_db_at_target);
    } else {
      std::snprintf(line, sizeof line, "%s,%zu,%llu,n/a\n", row.method_label.c_str(),
                    row.iterations, static_cast<unsigned long long>(row.real_mults));
    }
    os << line;
  }
}

}  // namespace cgmimo::sim
