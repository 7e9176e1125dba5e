// SPDX-License-Identifier: Apache-2.0
//
// Real-multiplication accounting for the detection/precoding kernels.
//
// Counting conventions (see docs/complexity.md for the derivations):
//   * complex x complex multiply        -> 4 real multiplications
//   * real x complex multiply           -> 2 real multiplications
//   * |z|^2 of a complex scalar         -> 2 real multiplications
//   * real x real multiply              -> 1 real multiplication
//   * additions, divisions, square roots are not counted
//   * Hermitian products are computed on one triangle only
//   * multiplications against structural zeros and identity blocks are skipped

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace cgmimo::opcount {

enum class Stage : int {
  kGram = 0,
  kMatchedFilter,
  kCgIteration,
  kTracker,
  kCholesky,
  kSubstitution,
  kNeumannTerm,
  kCglsIteration,
  kOther,
};

inline constexpr int kStageCount = 9;

std::string_view stage_name(Stage stage);

// Per-stage tally of real multiplications. Instances are trial-local; the
// harness folds them after the fact, so no locking is needed.
class Tally {
 public:
  void add(Stage stage, std::uint64_t n) { counts_[static_cast<int>(stage)] += n; }
  std::uint64_t get(Stage stage) const { return counts_[static_cast<int>(stage)]; }
  std::uint64_t total() const;
  void merge(const Tally& other);
  void reset() { counts_.fill(0); }

 private:
  std::array<std::uint64_t, kStageCount> counts_{};
};

// Activates `tally` for the current thread. Arithmetic kernels report into
// the active tally via record(); with no active tally record() is a no-op.
class ScopedTally {
 public:
  explicit ScopedTally(Tally& tally);
  ~ScopedTally();
  ScopedTally(const ScopedTally&) = delete;
  ScopedTally& operator=(const ScopedTally&) = delete;

 private:
  Tally* previous_;
};

// Attributes subsequent record() calls on this thread to `stage`.
class ScopedStage {
 public:
  explicit ScopedStage(Stage stage);
  ~ScopedStage();
  ScopedStage(const ScopedStage&) = delete;
  ScopedStage& operator=(const ScopedStage&) = delete;

 private:
  Stage previous_;
};

void record(std::uint64_t real_mults);
bool counting_active();

enum class DetectMethod { kCholesky, kCg, kCgls, kNeumann };

struct StageCounts {
  std::array<std::uint64_t, kStageCount> by_stage{};
  std::uint64_t total() const;
};

// Closed-form real-multiplication count for one soft-output equalization of a
// bs_antennas x users system (`iters` is ignored for the Cholesky method).
// Covers everything through xhat / mu / rho; the bit-level LLR mapping is
// common to all methods and excluded. The runtime tallies of the matching
// detector implementations agree with these formulas exactly.
StageCounts count_detect_stages(DetectMethod method, std::size_t bs_antennas,
                                std::size_t users, std::size_t iters);
std::uint64_t count_detect(DetectMethod method, std::size_t bs_antennas,
                           std::size_t users, std::size_t iters);

}  // namespace cgmimo::opcount
