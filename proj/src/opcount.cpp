// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/opcount.hpp"

namespace cgmimo::opcount {

namespace {
thread_local Tally* g_active_tally = nullptr;
thread_local Stage g_active_stage = Stage::kOther;
}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kGram: return "gram";
    case Stage::kMatchedFilter: return "matched-filter";
    case Stage::kCgIteration: return "cg-iteration";
    case Stage::kTracker: return "tracker";
    case Stage::kCholesky: return "cholesky";
    case Stage::kSubstitution: return "substitution";
    case Stage::kNeumannTerm: return "neumann-term";
    case Stage::kCglsIteration: return "cgls-iteration";
    case Stage::kOther: return "other";
  }
  return "other";
}

std::uint64_t Tally::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

void Tally::merge(const Tally& other) {
  for (int i = 0; i < kStageCount; ++i) counts_[i] += other.counts_[i];
}

ScopedTally::ScopedTally(Tally& tally) : previous_(g_active_tally) {
  g_active_tally = &tally;
}

ScopedTally::~ScopedTally() { g_active_tally = previous_; }

ScopedStage::ScopedStage(Stage stage) : previous_(g_active_stage) {
  g_active_stage = stage;
}

ScopedStage::~ScopedStage() { g_active_stage = previous_; }

void record(std::uint64_t real_mults) {
  if (g_active_tally != nullptr) g_active_tally->add(g_active_stage, real_mults);
}

bool counting_active() { return g_active_tally != nullptr; }

std::uint64_t StageCounts::total() const {
  std::uint64_t sum = 0;
  for (auto c : by_stage) sum += c;
  return sum;
}

namespace {

void set(StageCounts& c, Stage s, std::uint64_t n) {
  c.by_stage[static_cast<int>(s)] = n;
}

}  // namespace

StageCounts count_detect_stages(DetectMethod method, std::size_t bs_antennas,
                                std::size_t users, std::size_t iters) {
  const std::uint64_t b = bs_antennas;
  const std::uint64_t u = users;
  const std::uint64_t k = iters;
  StageCounts c;

  switch (method) {
    case DetectMethod::kCholesky: {
      set(c, Stage::kGram, 2 * b * u * u);
      set(c, Stage::kMatchedFilter, 4 * b * u);
      // A = M M^H, lower triangular M: column j costs 2j (diagonal) plus
      // 4j per entry below the diagonal.
      set(c, Stage::kCholesky, u * (u - 1) + 2 * u * (u - 1) * (u - 2) / 3);
      // Forward solves exploit the leading zeros of the unit columns,
      // backward solves produce full columns of inv(A); xhat applies the
      // inverse to the matched filter; mu/nu extraction streams
      // WH = I - rho^-1 inv(A) and the column norms of inv(A).
      const std::uint64_t fwd = 2 * (u * u * u - u) / 3;
      const std::uint64_t bwd = 2 * u * u * (u - 1);
      const std::uint64_t xhat = 4 * u * u;
      const std::uint64_t extract = 6 * u * u + 2 * u;
      set(c, Stage::kSubstitution, fwd + bwd + xhat + extract);
      break;
    }
    case DetectMethod::kCg: {
      set(c, Stage::kGram, 2 * b * u * u);
      set(c, Stage::kMatchedFilter, 4 * b * u);
      // ||r_0||^2 once, then per iteration: A p (4u^2), p^H e (4u),
      // v/r updates (2u each), ||r||^2 (2u), p update (2u).
      set(c, Stage::kCgIteration, 2 * u + k * (4 * u * u + 12 * u));
      // Diagonal SINR recursion: u multiplications per iteration (the k = 1
      // initialization is free, the final extraction mu_i = Ltilde_ii G_ii
      // costs u; per-iteration scalar coefficients are excluded, like
      // divisions).
      set(c, Stage::kTracker, k * u);
      break;
    }
    case DetectMethod::kCgls: {
      // No Gram matrix; only the column squared-norms feeding the diagonal
      // tracker are formed.
      set(c, Stage::kGram, 2 * b * u);
      set(c, Stage::kMatchedFilter, 4 * b * u);
      // Augmented matrix [H; sqrt(rho^-1) I]: identity-block rows cost 2u
      // (real scale) per product instead of full dense rows.
      set(c, Stage::kCglsIteration, 2 * u + k * (8 * b * u + 4 * b + 14 * u));
      set(c, Stage::kTracker, k * u);
      break;
    }
    case DetectMethod::kNeumann: {
      set(c, Stage::kGram, 2 * b * u * u);
      set(c, Stage::kMatchedFilter, 4 * b * u);
      // Term 1 is D^-1 (reciprocals only). Term 2 is -D^-1 E D^-1, formed by
      // two diagonal scalings of the off-diagonal part. Each further term is
      // a triangle-only product with -D^-1 E (the terms stay Hermitian).
      std::uint64_t series = 0;
      if (k >= 2) series += 4 * u * (u - 1);
      if (k >= 3) series += (k - 2) * 2 * u * u * (u + 1);
      set(c, Stage::kNeumannTerm, series);
      // Apply the approximate inverse to the matched filter, then the
      // diagonal-only extraction mu_i = Re[(Atilde G)_ii],
      // nu_i^2 = Es mu_i (1 - mu_i).
      const std::uint64_t apply = (k == 1) ? 2 * u : 4 * u * u;
      const std::uint64_t extract = ((k == 1) ? u : 4 * u * u) + 2 * u;
      set(c, Stage::kSubstitution, apply + extract);
      break;
    }
  }
  return c;
}

std::uint64_t count_detect(DetectMethod method, std::size_t bs_antennas,
                           std::size_t users, std::size_t iters) {
  return count_detect_stages(method, bs_antennas, users, iters).total();
}

}  // namespace cgmimo::opcount
