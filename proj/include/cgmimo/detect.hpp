// SPDX-License-Identifier: Apache-2.0
//
// Uplink soft-output MMSE detection. Four routes produce the same kind of
// output: an explicit Cholesky-based reference, CG with an exact or a
// diagonal (approximate) SINR recursion running inside the iteration loop,
// CGLS on the augmented system, and a truncated-Neumann baseline.
//
// Per-user quantities follow the model xhat_i = mu_i x_i + z_i with
// mu_i = w_i^H h_i, var(z_i) = nu_i^2, post-equalization SINR
// rho_i = mu_i^2 / nu_i^2, and max-log LLRs
// L_{i,b} = rho_i (min_{a in X_b^0} |xhat_i/mu_i - a|^2 - min_{X_b^1} ...).

#pragma once

#include <cstddef>
#include <vector>

#include "cgmimo/constellation.hpp"
#include "cgmimo/linalg.hpp"

namespace cgmimo::detect {

inline constexpr double kLlrMax = 64.0;
// Below this equalized gain the symbol is treated as an erasure (all-zero
// LLRs); it signals an unconverged tracker, not a numerical fault.
inline constexpr double kGainFloor = 1e-12;

struct SoftOutput {
  ComplexVector xhat;
  std::vector<double> mu;
  std::vector<double> rho;
  std::vector<std::vector<double>> llrs;  // [user][bit], clipped to +-kLlrMax
};

enum class SinrTracker { kExact, kApprox };

// Max-log LLRs for one user; negative favors bit 0.
std::vector<double> compute_llrs(cplx xhat, double mu, double rho,
                                 const phy::Constellation& c);

// W = (H^H H + rho_u^-1 I)^-1 H^H.
ComplexMatrix mmse_matrix_explicit(const ComplexMatrix& h, double rho_u);

// Literal evaluation of the explicit detector: xhat = W y, mu_i = w_i^H h_i,
// nu_i^2 = sum_{j != i} |w_i^H h_j|^2 Es + ||w_i||^2 N0. This is the oracle
// every other detector is validated against.
SoftOutput detect_explicit(const ComplexMatrix& h, const ComplexVector& y,
                           double rho_u, double n0, double es,
                           const phy::Constellation& c);

// Same outputs as detect_explicit computed the production way: xhat by two
// triangular solves, mu/nu from inv(A) via W H = I - rho_u^-1 inv(A). The
// operation tallies of this route match the closed-form Cholesky count.
SoftOutput detect_cholesky(const ComplexMatrix& h, const ComplexVector& y,
                           double rho_u, double n0, double es,
                           const phy::Constellation& c);

SoftOutput detect_cg(const ComplexMatrix& h, const ComplexVector& y,
                     double rho_u, double n0, double es,
                     const phy::Constellation& c, std::size_t iters,
                     SinrTracker tracker);

// CGLS on [H; sqrt(rho_u^-1) I] with the diagonal SINR recursion driven by
// the CGLS step scalars; iterates coincide with detect_cg.
SoftOutput detect_cgls(const ComplexMatrix& h, const ComplexVector& y,
                       double rho_u, double n0, double es,
                       const phy::Constellation& c, std::size_t iters);

// Truncated-Neumann baseline with the low-complexity extraction
// mu_i = Re[(Atilde G)_ii], nu_i^2 = Es mu_i (1 - mu_i).
SoftOutput detect_neumann(const ComplexMatrix& h, const ComplexVector& y,
                          double rho_u, double n0, double es,
                          const phy::Constellation& c, std::size_t terms);

// Exact in-iteration SINR recursion. The filter matrix satisfies
// xhat_k = filter_k H^H y for the CG iterate xhat_k; at k = U it equals
// inv(A). Keeps the three-deep history window the update needs.
class ExactSinrTracker {
 public:
  explicit ExactSinrTracker(std::size_t users);

  // Advance to iteration k+1 given this iteration's step scalars and the
  // full regularized Gram matrix.
  void step(const ComplexMatrix& a_full, double alpha, double beta);
  std::size_t iteration() const { return k_; }
  const ComplexMatrix& filter() const { return filt_; }

  // mu_i = (filter G)_ii, nu_i^2 = Es sum_{j != i} |(filter G)_ij|^2
  //        + N0 (filter G filter^H)_ii.
  void extract(const HermitianMatrix& gram, double es, double n0,
               std::vector<double>& mu, std::vector<double>& nu2) const;

 private:
  std::size_t users_;
  std::size_t k_ = 0;
  ComplexMatrix filt_, filt_m1_, filt_m2_;
  double alpha_m1_ = 1.0, alpha_m2_ = 1.0;
  double beta_m1_ = 0.0, beta_m2_ = 0.0;
};

// Diagonal approximation of the recursion: the Gram matrix is replaced by
// its main diagonal, so the state stays a real diagonal and each step costs
// U multiplications.
class ApproxSinrTracker {
 public:
  explicit ApproxSinrTracker(std::size_t users);

  void step(const std::vector<double>& a_diag, double alpha, double beta);
  std::size_t iteration() const { return k_; }
  const std::vector<double>& filter_diag() const { return filt_; }

  // mu_i = Ltilde_ii G_ii; rho_i = G_ii / N0 (iteration independent).
  void extract(const std::vector<double>& gram_diag, double n0,
               std::vector<double>& mu, std::vector<double>& rho) const;

 private:
  std::size_t users_;
  std::size_t k_ = 0;
  std::vector<double> filt_, filt_m1_, filt_m2_;
  double alpha_m1_ = 1.0, alpha_m2_ = 1.0;
  double beta_m1_ = 0.0, beta_m2_ = 0.0;
};

// Extraction from an arbitrary equalization kernel L (mu_i, nu_i^2 as in
// ExactSinrTracker::extract); also serves the explicit-inverse case L = inv(A).
void tracker_exact_extract(const ComplexMatrix& filter, const HermitianMatrix& gram,
                           double es, double n0, std::vector<double>& mu,
                           std::vector<double>& nu2);

}  // namespace cgmimo::detect
