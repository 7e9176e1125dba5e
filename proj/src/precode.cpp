// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/precode.hpp"

#include <cmath>
#include <stdexcept>

#include "cgmimo/opcount.hpp"
#include "cgmimo/solvers.hpp"

namespace cgmimo::precode {

namespace {

using opcount::ScopedStage;
using opcount::Stage;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

PrecodeResult normalize(ComplexVector q) {
  PrecodeResult result;
  result.gain = norm2(q);
  if (result.gain < 1e-300) {
    result.zero_input = true;
    result.transmit.assign(q.size(), cplx(0.0, 0.0));
    result.precoded = std::move(q);
    result.gain = 0.0;
    return result;
  }
  result.transmit = q;
  scale(1.0 / result.gain, result.transmit);
  result.precoded = std::move(q);
  return result;
}

HermitianMatrix downlink_gram(const ComplexMatrix& h_downlink, double rho_d) {
  ScopedStage stage(Stage::kGram);
  return gram_regularized(h_downlink, 1.0 / rho_d, GramSide::kDownlink);
}

}  // namespace

PrecodeResult precode_explicit(const ComplexMatrix& h_downlink, const ComplexVector& t,
                               double rho_d) {
  require(rho_d > 0.0, "precode_explicit: rho_d must be positive");
  require(h_downlink.rows() == t.size(), "precode_explicit: dimension mismatch");
  const HermitianMatrix a = downlink_gram(h_downlink, rho_d);
  const ComplexMatrix inv = solvers::cholesky_inverse(a);
  ScopedStage stage(Stage::kSubstitution);
  const ComplexVector v = matvec(inv, t);
  return normalize(matvec_adjoint(h_downlink, v));
}

PrecodeResult precode_cg(const ComplexMatrix& h_downlink, const ComplexVector& t,
                         double rho_d, std::size_t iters,
                         std::vector<ComplexVector>* q_trace) {
  require(rho_d > 0.0, "precode_cg: rho_d must be positive");
  require(h_downlink.rows() == t.size(), "precode_cg: dimension mismatch");
  const HermitianMatrix a = downlink_gram(h_downlink, rho_d);

  solvers::IterOptions opts;
  opts.keep_trace = q_trace != nullptr;
  const auto res = solvers::cg_solve(a, t, iters, opts);
  if (q_trace != nullptr) {
    q_trace->clear();
    for (const auto& v : res.trace) q_trace->push_back(matvec_adjoint(h_downlink, v));
  }
  return normalize(matvec_adjoint(h_downlink, res.solution));
}

PrecodeResult precode_cgls(const ComplexMatrix& h_downlink, const ComplexVector& t,
                           double rho_d, std::size_t iters,
                           std::vector<ComplexVector>* q_trace) {
  require(rho_d > 0.0, "precode_cgls: rho_d must be positive");
  require(h_downlink.rows() == t.size(), "precode_cgls: dimension mismatch");
  const auto res = solvers::cgls_solve_min_norm(h_downlink, 1.0 / rho_d, t, iters,
                                                q_trace != nullptr);
  if (q_trace != nullptr) *q_trace = res.trace;
  return normalize(res.solution);
}

PrecodeResult precode_neumann(const ComplexMatrix& h_downlink, const ComplexVector& t,
                              double rho_d, std::size_t terms) {
  require(rho_d > 0.0, "precode_neumann: rho_d must be positive");
  require(h_downlink.rows() == t.size(), "precode_neumann: dimension mismatch");
  const HermitianMatrix a = downlink_gram(h_downlink, rho_d);
  const ComplexMatrix inv = solvers::neumann_inverse(a, terms);
  ScopedStage stage(Stage::kSubstitution);
  const ComplexVector v = matvec(inv, t);
  return normalize(matvec_adjoint(h_downlink, v));
}

}  // namespace cgmimo::precode
