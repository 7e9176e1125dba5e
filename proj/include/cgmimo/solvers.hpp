// SPDX-License-Identifier: Apache-2.0
//
// System-solution strategies behind the detectors and precoders: plain CG on
// the regularized Gram matrix, CGLS on the augmented system, Cholesky-based
// exact inversion, and the truncated Neumann series. All solvers run a fixed
// iteration count (complexity comparisons need deterministic counts); the
// only guards are a freeze on an exactly-converged residual and a breakdown
// error on non-positive curvature.

#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "cgmimo/linalg.hpp"

namespace cgmimo::solvers {

struct SolverBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Step sizes and direction ratios of a completed run, one entry per
// iteration. Consumers of the SINR recursions apply the boundary convention
// alpha_k = 1, beta_k = 0 for k < 1 themselves.
struct ScalarHistory {
  std::vector<double> alphas;
  std::vector<double> betas;
};

struct IterOptions {
  bool keep_trace = false;
  // Called after each completed iteration k (1-based) with alpha_k, beta_k;
  // used to interleave the SINR trackers with the solver loop.
  std::function<void(std::size_t, double, double)> on_iteration;
};

struct CgResult {
  ComplexVector solution;
  ScalarHistory history;
  std::vector<ComplexVector> trace;  // trace[k-1] = iterate after iteration k
};

// Runs exactly `iters` CG iterations on A v = b from v = 0. Exact solution
// (up to rounding) at iters = dim(A) for positive definite A.
CgResult cg_solve(const HermitianMatrix& a, const ComplexVector& b,
                  std::size_t iters, const IterOptions& options = {});

// Same loop with a caller-provided operator in place of the matrix.
CgResult cg_solve_op(const std::function<ComplexVector(const ComplexVector&)>& apply_a,
                     const ComplexVector& b, std::size_t iters,
                     const IterOptions& options = {});

struct CglsResult {
  ComplexVector solution;
  ScalarHistory history;
  std::vector<ComplexVector> trace;
};

// CGLS for min ||b - H x|| without forming H^H H. Iterate k matches CG
// iterate k on the normal equations (H^H H) x = H^H b.
CglsResult cgls_solve(const ComplexMatrix& h, const ComplexVector& b,
                      std::size_t iters, const IterOptions& options = {});

// CGLS on the implicitly augmented system [H; sqrt(rho_inv) I] x ~ [y; 0].
// The identity block is applied as a real scaling, never materialized.
CglsResult cgls_solve_regularized(const ComplexMatrix& h, double rho_inv,
                                  const ComplexVector& y, std::size_t iters,
                                  const IterOptions& options = {});

struct MinNormResult {
  ComplexVector solution;  // leading h.cols() entries of the augmented iterate
  ScalarHistory history;
  std::vector<ComplexVector> trace;
};

// Minimum-norm CG (normal equations of the second kind) for the wide
// augmented problem min || t - [H  sqrt(rho_inv) I] qbar ||. Runs the CG
// recursion on the dim(t)-sized outer-product system H H^H + rho_inv I
// without forming it; iterates coincide with cg_solve on that system mapped
// through H^H. The trailing identity-block entries of qbar are discarded
// without ever being computed.
MinNormResult cgls_solve_min_norm(const ComplexMatrix& h, double rho_inv,
                                  const ComplexVector& t, std::size_t iters,
                                  bool keep_trace = false);

// Lower-triangular factor M with A = M M^H. Throws NotPositiveDefinite on a
// non-positive pivot.
ComplexMatrix cholesky_factor(const HermitianMatrix& a);

// Explicit inverse via the factorization and column-wise forward/backward
// substitution. Forward solves skip the leading zeros of the unit columns.
ComplexMatrix cholesky_inverse(const HermitianMatrix& a);

// In-place triangular solves against a lower factor M (and its adjoint).
void solve_lower(const ComplexMatrix& m, ComplexVector& x);
void solve_upper_adjoint(const ComplexMatrix& m, ComplexVector& x);

// Truncated Neumann series sum_{k=0}^{terms-1} (-D^-1 E)^k D^-1 with
// A = D + E, D = diag(A). No convergence check: the series may diverge when
// A is not diagonally dominant.
ComplexMatrix neumann_inverse(const HermitianMatrix& a, std::size_t terms);

}  // namespace cgmimo::solvers
