// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cgmimo/opcount.hpp"
#include "cgmimo/solvers.hpp"

namespace cgmimo::detect {

namespace {

using opcount::ScopedStage;
using opcount::Stage;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double clip_llr(double v) { return std::clamp(v, -kLlrMax, kLlrMax); }

double safe_rho(double mu, double nu2) {
  if (nu2 < 1e-300) return 0.0;
  return mu * mu / nu2;
}

// Gram matrix with the regularizer stripped back off the diagonal.
HermitianMatrix unregularized(const HermitianMatrix& a, double rho_inv) {
  HermitianMatrix g(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < i; ++j) g.set(i, j, a.at(i, j));
    g.set(i, i, a.diag(i) - rho_inv);
  }
  return g;
}

SoftOutput finish(ComplexVector xhat, std::vector<double> mu, std::vector<double> rho,
                  const phy::Constellation& c) {
  SoftOutput out;
  out.llrs.resize(xhat.size());
  for (std::size_t i = 0; i < xhat.size(); ++i)
    out.llrs[i] = compute_llrs(xhat[i], mu[i], rho[i], c);
  out.xhat = std::move(xhat);
  out.mu = std::move(mu);
  out.rho = std::move(rho);
  return out;
}

}  // namespace

namespace {

double axis_min_sq(double z, const std::vector<double>& amps) {
  double best = std::numeric_limits<double>::infinity();
  for (double a : amps) {
    const double d = z - a;
    best = std::min(best, d * d);
  }
  return best;
}

}  // namespace

std::vector<double> compute_llrs(cplx xhat, double mu, double rho,
                                 const phy::Constellation& c) {
  std::vector<double> llrs(c.bits_per_symbol, 0.0);
  if (std::abs(mu) < kGainFloor) return llrs;  // erasure
  if (rho < 0.0) rho = 0.0;
  const cplx z = xhat / mu;
  // Per-axis minima; the other-axis contribution cancels in the difference.
  for (int p = 0; p < c.axis_bits; ++p) {
    const double d0 = axis_min_sq(z.real(), c.axis_bit0[p]);
    const double d1 = axis_min_sq(z.real(), c.axis_bit1[p]);
    llrs[p] = clip_llr(rho * (d0 - d1));
  }
  for (int p = 0; p < c.axis_bits; ++p) {
    const double d0 = axis_min_sq(z.imag(), c.axis_bit0[p]);
    const double d1 = axis_min_sq(z.imag(), c.axis_bit1[p]);
    llrs[c.axis_bits + p] = clip_llr(rho * (d0 - d1));
  }
  return llrs;
}

ComplexMatrix mmse_matrix_explicit(const ComplexMatrix& h, double rho_u) {
  require(rho_u > 0.0, "mmse_matrix_explicit: rho_u must be positive");
  const HermitianMatrix a = gram_regularized(h, 1.0 / rho_u, GramSide::kUplink);
  return matmul(solvers::cholesky_inverse(a), hermitian_of(h));
}

SoftOutput detect_explicit(const ComplexMatrix& h, const ComplexVector& y,
                           double rho_u, double n0, double es,
                           const phy::Constellation& c) {
  require(h.rows() == y.size(), "detect_explicit: dimension mismatch");
  require(n0 > 0.0 && es > 0.0, "detect_explicit: N0 and Es must be positive");
  const std::size_t users = h.cols();

  const ComplexMatrix w = mmse_matrix_explicit(h, rho_u);
  ComplexVector xhat = matvec(w, y);
  const ComplexMatrix wh = matmul(w, h);

  std::vector<double> mu(users), rho(users);
  for (std::size_t i = 0; i < users; ++i) {
    const cplx gain = wh(i, i);
    if (std::abs(gain.imag()) > 1e-9 * std::abs(gain) + 1e-300)
      throw std::runtime_error("detect_explicit: equalized gain is not real");
    mu[i] = gain.real();
    double interference = 0.0;
    for (std::size_t j = 0; j < users; ++j)
      if (j != i) interference += std::norm(wh(i, j));
    double wnorm2 = 0.0;
    for (std::size_t j = 0; j < h.rows(); ++j) wnorm2 += std::norm(w(i, j));
    const double nu2 = interference * es + wnorm2 * n0;
    rho[i] = safe_rho(mu[i], nu2);
  }
  return finish(std::move(xhat), std::move(mu), std::move(rho), c);
}

SoftOutput detect_cholesky(const ComplexMatrix& h, const ComplexVector& y,
                           double rho_u, double n0, double es,
                           const phy::Constellation& c) {
  require(h.rows() == y.size(), "detect_cholesky: dimension mismatch");
  require(rho_u > 0.0 && n0 > 0.0 && es > 0.0, "detect_cholesky: bad parameters");
  const std::size_t users = h.cols();
  const double rho_inv = 1.0 / rho_u;

  HermitianMatrix a;
  {
    ScopedStage stage(Stage::kGram);
    a = gram_regularized(h, rho_inv, GramSide::kUplink);
  }
  ComplexVector b;
  {
    ScopedStage stage(Stage::kMatchedFilter);
    b = matvec_adjoint(h, y);
  }

  const ComplexMatrix inv = solvers::cholesky_inverse(a);

  ScopedStage stage(Stage::kSubstitution);
  // xhat = inv(A) b.
  ComplexVector xhat(users, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < users; ++i) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < users; ++j) acc += inv(i, j) * b[j];
    xhat[i] = acc;
  }
  opcount::record(4ull * users * users);

  // mu/nu extraction through the equalized channel WH = I - rho_u^-1 inv(A):
  //   interference_i = Es sum_{j != i} |(WH)_ij|^2
  //   noise_i        = N0 (W W^H)_ii = N0 (Re inv(A)_ii - rho_u^-1 ||inv(A) col i||^2)
  ComplexMatrix eqch(users, users);
  for (std::size_t i = 0; i < users; ++i) {
    for (std::size_t j = 0; j < users; ++j) {
      const cplx v = inv(i, j);
      eqch(i, j) = cplx((i == j ? 1.0 : 0.0) - rho_inv * v.real(), -rho_inv * v.imag());
    }
  }
  opcount::record(2ull * users * users);

  std::vector<double> mu(users), rho(users);
  for (std::size_t i = 0; i < users; ++i) {
    mu[i] = eqch(i, i).real();
    double interference = 0.0;
    for (std::size_t j = 0; j < users; ++j)
      if (j != i) interference += std::norm(eqch(i, j));
    double colnorm2 = 0.0;
    for (std::size_t j = 0; j < users; ++j) colnorm2 += std::norm(inv(j, i));
    const double noise = n0 * (inv(i, i).real() - rho_inv * colnorm2);
    const double nu2 = es * interference + noise;
    rho[i] = safe_rho(mu[i], nu2);
    opcount::record(2ull * (users - 1) + 1 + 2ull * users + 2 + 1);
  }

  return finish(std::move(xhat), std::move(mu), std::move(rho), c);
}

SoftOutput detect_cg(const ComplexMatrix& h, const ComplexVector& y,
                     double rho_u, double n0, double es,
                     const phy::Constellation& c, std::size_t iters,
                     SinrTracker tracker) {
  require(h.rows() == y.size(), "detect_cg: dimension mismatch");
  require(rho_u > 0.0 && n0 > 0.0 && es > 0.0, "detect_cg: bad parameters");
  require(iters >= 1, "detect_cg: need at least one iteration");
  const std::size_t users = h.cols();
  const double rho_inv = 1.0 / rho_u;

  HermitianMatrix a;
  {
    ScopedStage stage(Stage::kGram);
    a = gram_regularized(h, rho_inv, GramSide::kUplink);
  }
  ComplexVector b;
  {
    ScopedStage stage(Stage::kMatchedFilter);
    b = matvec_adjoint(h, y);
  }

  std::vector<double> mu(users), rho(users);
  solvers::CgResult res;

  if (tracker == SinrTracker::kExact) {
    ExactSinrTracker tr(users);
    const ComplexMatrix a_full = a.full();
    solvers::IterOptions opts;
    opts.on_iteration = [&](std::size_t, double alpha, double beta) {
      ScopedStage stage(Stage::kTracker);
      tr.step(a_full, alpha, beta);
    };
    res = solvers::cg_solve(a, b, iters, opts);
    const HermitianMatrix gram = unregularized(a, rho_inv);
    std::vector<double> nu2(users);
    {
      ScopedStage stage(Stage::kTracker);
      tr.extract(gram, es, n0, mu, nu2);
    }
    for (std::size_t i = 0; i < users; ++i) rho[i] = safe_rho(mu[i], nu2[i]);
  } else {
    ApproxSinrTracker tr(users);
    std::vector<double> a_diag = a.real_diag();
    std::vector<double> gram_diag(users);
    for (std::size_t i = 0; i < users; ++i) gram_diag[i] = a_diag[i] - rho_inv;
    solvers::IterOptions opts;
    opts.on_iteration = [&](std::size_t, double alpha, double beta) {
      ScopedStage stage(Stage::kTracker);
      tr.step(a_diag, alpha, beta);
    };
    res = solvers::cg_solve(a, b, iters, opts);
    ScopedStage stage(Stage::kTracker);
    tr.extract(gram_diag, n0, mu, rho);
  }
  return finish(std::move(res.solution), std::move(mu), std::move(rho), c);
}

SoftOutput detect_cgls(const ComplexMatrix& h, const ComplexVector& y,
                       double rho_u, double n0, double es,
                       const phy::Constellation& c, std::size_t iters) {
  require(h.rows() == y.size(), "detect_cgls: dimension mismatch");
  require(rho_u > 0.0 && n0 > 0.0 && es > 0.0, "detect_cgls: bad parameters");
  require(iters >= 1, "detect_cgls: need at least one iteration");
  const std::size_t users = h.cols();
  const double rho_inv = 1.0 / rho_u;

  // Only the Gram diagonal is needed (tracker input + extraction).
  std::vector<double> gram_diag(users, 0.0);
  {
    ScopedStage stage(Stage::kGram);
    for (std::size_t j = 0; j < h.rows(); ++j)
      for (std::size_t i = 0; i < users; ++i) gram_diag[i] += std::norm(h(j, i));
    opcount::record(2ull * h.rows() * users);
  }
  std::vector<double> a_diag(users);
  for (std::size_t i = 0; i < users; ++i) a_diag[i] = gram_diag[i] + rho_inv;

  ApproxSinrTracker tr(users);
  solvers::IterOptions opts;
  opts.on_iteration = [&](std::size_t, double alpha, double beta) {
    ScopedStage stage(Stage::kTracker);
    tr.step(a_diag, alpha, beta);
  };
  auto res = solvers::cgls_solve_regularized(h, rho_inv, y, iters, opts);

  std::vector<double> mu(users), rho(users);
  {
    ScopedStage stage(Stage::kTracker);
    tr.extract(gram_diag, n0, mu, rho);
  }
  return finish(std::move(res.solution), std::move(mu), std::move(rho), c);
}

SoftOutput detect_neumann(const ComplexMatrix& h, const ComplexVector& y,
                          double rho_u, double n0, double es,
                          const phy::Constellation& c, std::size_t terms) {
  require(h.rows() == y.size(), "detect_neumann: dimension mismatch");
  require(rho_u > 0.0 && n0 > 0.0 && es > 0.0, "detect_neumann: bad parameters");
  require(terms >= 1, "detect_neumann: need at least one series term");
  const std::size_t users = h.cols();
  const double rho_inv = 1.0 / rho_u;

  HermitianMatrix a;
  {
    ScopedStage stage(Stage::kGram);
    a = gram_regularized(h, rho_inv, GramSide::kUplink);
  }
  ComplexVector b;
  {
    ScopedStage stage(Stage::kMatchedFilter);
    b = matvec_adjoint(h, y);
  }

  const ComplexMatrix approx_inv = solvers::neumann_inverse(a, terms);
  const HermitianMatrix gram = unregularized(a, rho_inv);

  ScopedStage stage(Stage::kSubstitution);
  ComplexVector xhat(users, cplx(0.0, 0.0));
  std::vector<double> mu(users), rho(users);
  if (terms == 1) {
    for (std::size_t i = 0; i < users; ++i) {
      const double d = approx_inv(i, i).real();
      xhat[i] = d * b[i];
      mu[i] = d * gram.diag(i);
    }
    opcount::record(3ull * users);
  } else {
    for (std::size_t i = 0; i < users; ++i) {
      cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < users; ++j) acc += approx_inv(i, j) * b[j];
      xhat[i] = acc;
      cplx diag(0.0, 0.0);
      for (std::size_t j = 0; j < users; ++j) diag += approx_inv(i, j) * gram.at(j, i);
      mu[i] = diag.real();
    }
    opcount::record(8ull * users * users);
  }
  for (std::size_t i = 0; i < users; ++i) {
    // MRC-style shortcut: exact under the true MMSE filter, an approximation
    // under the truncated series.
    const double nu2 = std::max(es * (mu[i] - mu[i] * mu[i]), 1e-12);
    rho[i] = safe_rho(mu[i], nu2);
  }
  opcount::record(2ull * users);

  return finish(std::move(xhat), std::move(mu), std::move(rho), c);
}

ExactSinrTracker::ExactSinrTracker(std::size_t users)
    : users_(users),
      filt_(users, users),
      filt_m1_(users, users),
      filt_m2_(users, users) {}

void ExactSinrTracker::step(const ComplexMatrix& a_full, double alpha, double beta) {
  ++k_;
  if (k_ == 1) {
    // Stated initialization: filter_1 = alpha_1 I.
    ComplexMatrix next(users_, users_);
    for (std::size_t i = 0; i < users_; ++i) next(i, i) = alpha;
    filt_m2_ = std::move(filt_m1_);
    filt_m1_ = std::move(filt_);
    filt_ = std::move(next);
  } else {
    // filter_k = filter_{k-1}
    //          + (alpha_k (1 + beta_{k-1}) / alpha_{k-1} I - alpha_k A)
    //            (filter_{k-1} - filter_{k-2})
    //          - alpha_k beta_{k-2} / alpha_{k-2} (filter_{k-2} - filter_{k-3})
    const double c1 = alpha * (1.0 + beta_m1_) / alpha_m1_;
    const double c2 = alpha * beta_m2_ / alpha_m2_;
    const ComplexMatrix d1 = sub(filt_, filt_m1_);
    const ComplexMatrix d2 = sub(filt_m1_, filt_m2_);
    ComplexMatrix ad1 = matmul(a_full, d1);
    ComplexMatrix next(users_, users_);
    for (std::size_t i = 0; i < users_; ++i)
      for (std::size_t j = 0; j < users_; ++j)
        next(i, j) = filt_(i, j) + c1 * d1(i, j) - alpha * ad1(i, j) - c2 * d2(i, j);
    opcount::record(6ull * users_ * users_ + 2);
    filt_m2_ = std::move(filt_m1_);
    filt_m1_ = filt_;
    filt_ = std::move(next);
  }
  alpha_m2_ = alpha_m1_;
  alpha_m1_ = alpha;
  beta_m2_ = beta_m1_;
  beta_m1_ = beta;
}

void ExactSinrTracker::extract(const HermitianMatrix& gram, double es, double n0,
                               std::vector<double>& mu, std::vector<double>& nu2) const {
  tracker_exact_extract(filt_, gram, es, n0, mu, nu2);
}

void tracker_exact_extract(const ComplexMatrix& filter, const HermitianMatrix& gram,
                           double es, double n0, std::vector<double>& mu,
                           std::vector<double>& nu2) {
  const std::size_t users = filter.rows();
  if (gram.dim() != users || filter.cols() != users)
    throw std::invalid_argument("tracker_exact_extract: dimension mismatch");
  const ComplexMatrix bmat = matmul(filter, gram.full());
  mu.assign(users, 0.0);
  nu2.assign(users, 0.0);
  for (std::size_t i = 0; i < users; ++i) {
    mu[i] = bmat(i, i).real();
    double interference = 0.0;
    for (std::size_t j = 0; j < users; ++j)
      if (j != i) interference += std::norm(bmat(i, j));
    // C_ii = (B filter^H)_ii; only the diagonal is needed.
    cplx cii(0.0, 0.0);
    for (std::size_t j = 0; j < users; ++j) cii += bmat(i, j) * std::conj(filter(i, j));
    nu2[i] = interference * es + cii.real() * n0;
    opcount::record(6ull * users);
  }
}

ApproxSinrTracker::ApproxSinrTracker(std::size_t users)
    : users_(users), filt_(users, 0.0), filt_m1_(users, 0.0), filt_m2_(users, 0.0) {}

void ApproxSinrTracker::step(const std::vector<double>& a_diag, double alpha, double beta) {
  if (a_diag.size() != users_)
    throw std::invalid_argument("ApproxSinrTracker::step: dimension mismatch");
  ++k_;
  if (k_ == 1) {
    filt_m2_.swap(filt_m1_);
    filt_m1_.swap(filt_);
    filt_.assign(users_, alpha);
  } else {
    const double c1 = alpha * (1.0 + beta_m1_) / alpha_m1_;
    const double c2 = alpha * beta_m2_ / alpha_m2_;
    std::vector<double> next(users_);
    for (std::size_t i = 0; i < users_; ++i) {
      const double d1 = filt_[i] - filt_m1_[i];
      const double d2 = filt_m1_[i] - filt_m2_[i];
      next[i] = filt_[i] + (c1 - alpha * a_diag[i]) * d1 - c2 * d2;
    }
    // Counted as the U diagonal multiplications of the recursion; the
    // per-iteration scalar coefficients are excluded like divisions are.
    opcount::record(users_);
    filt_m2_.swap(filt_m1_);
    filt_m1_ = filt_;
    filt_ = std::move(next);
  }
  alpha_m2_ = alpha_m1_;
  alpha_m1_ = alpha;
  beta_m2_ = beta_m1_;
  beta_m1_ = beta;
}

void ApproxSinrTracker::extract(const std::vector<double>& gram_diag, double n0,
                                std::vector<double>& mu, std::vector<double>& rho) const {
  if (gram_diag.size() != users_)
    throw std::invalid_argument("ApproxSinrTracker::extract: dimension mismatch");
  mu.assign(users_, 0.0);
  rho.assign(users_, 0.0);
  for (std::size_t i = 0; i < users_; ++i) {
    mu[i] = filt_[i] * gram_diag[i];
    rho[i] = n0 > 0.0 ? gram_diag[i] / n0 : 0.0;
  }
  opcount::record(users_);
}

}  // namespace cgmimo::detect
