// SPDX-License-Identifier: Apache-2.0
//
// Downlink MMSE precoding: explicit inverse, CG on the downlink Gram system
// (q = H_d^H v), minimum-norm CGLS on the augmented wide system, and a
// truncated-Neumann variant. The transmit vector is normalized to unit power
// per precoded vector.

#pragma once

#include <cstddef>
#include <vector>

#include "cgmimo/linalg.hpp"

namespace cgmimo::precode {

struct PrecodeResult {
  ComplexVector precoded;   // q, length B
  ComplexVector transmit;   // s = q / ||q||; zeros when flagged
  double gain = 0.0;        // ||q||
  bool zero_input = false;  // t = 0: normalization undefined, s not produced
};

// q = H_d^H (H_d H_d^H + rho_d^-1 I)^-1 t.
PrecodeResult precode_explicit(const ComplexMatrix& h_downlink, const ComplexVector& t,
                               double rho_d);

// Solves (H_d H_d^H + rho_d^-1 I) v = t by CG, q_K = H_d^H v_K. K = 1 is
// matched-filter precoding up to the scalar alpha_1; K = U is exact.
// When `q_trace` is given it receives q_k for every iteration.
PrecodeResult precode_cg(const ComplexMatrix& h_downlink, const ComplexVector& t,
                         double rho_d, std::size_t iters,
                         std::vector<ComplexVector>* q_trace = nullptr);

// Minimum-norm CGLS on min || t - [H_d  sqrt(rho_d^-1) I] qbar ||; the
// leading B entries of the iterate match precode_cg's q per iteration, the
// identity-block tail is discarded unused.
PrecodeResult precode_cgls(const ComplexMatrix& h_downlink, const ComplexVector& t,
                           double rho_d, std::size_t iters,
                           std::vector<ComplexVector>* q_trace = nullptr);

PrecodeResult precode_neumann(const ComplexMatrix& h_downlink, const ComplexVector& t,
                              double rho_d, std::size_t terms);

}  // namespace cgmimo::precode
