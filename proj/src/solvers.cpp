// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/solvers.hpp"

#include <cmath>
#include <memory>

#include "cgmimo/opcount.hpp"

namespace cgmimo::solvers {

namespace {

using opcount::ScopedStage;
using opcount::Stage;

// Residual energy at machine-level convergence relative to the initial one
// counts as exact convergence; the iterate is frozen and the remaining
// iterations report alpha = 1, beta = 0 so the SINR recursions stay well
// defined (b = 0 lands here immediately).
constexpr double kFreezeRel = 1e-28;
// Division guard on p^H A p, per the fixed-iteration design.
constexpr double kCurvatureTol = 1e-30;

bool frozen(double rnorm2, double rnorm2_initial) {
  return rnorm2 <= kFreezeRel * rnorm2_initial;
}

double real_part_checked(cplx quad_form, const char* who) {
  // Hermitian A makes p^H A p real in exact arithmetic; discard the rounding
  // imaginary part after checking it is negligible.
  if (std::abs(quad_form.imag()) > 1e-9 * std::abs(quad_form) + 1e-300)
    throw SolverBreakdown(std::string(who) + ": quadratic form is not real (matrix not Hermitian?)");
  return quad_form.real();
}

CgResult cg_core(const std::function<ComplexVector(const ComplexVector&)>& apply_a,
                 const ComplexVector& b, std::size_t iters, const IterOptions& options) {
  if (b.empty()) throw std::invalid_argument("cg_solve: empty right-hand side");
  if (iters < 1) throw std::invalid_argument("cg_solve: need at least one iteration");

  ScopedStage stage(Stage::kCgIteration);
  const std::size_t n = b.size();
  CgResult result;
  result.solution.assign(n, cplx(0.0, 0.0));
  ComplexVector residual = b;
  ComplexVector direction = residual;
  double rnorm2 = norm2_sq(residual);
  const double rnorm2_initial = rnorm2;

  for (std::size_t k = 1; k <= iters; ++k) {
    double alpha = 1.0, beta = 0.0;
    if (!frozen(rnorm2, rnorm2_initial)) {
      ComplexVector e = apply_a(direction);
      const double curvature = real_part_checked(dot_h(direction, e), "cg_solve");
      if (curvature < kCurvatureTol)
        throw SolverBreakdown("cg_solve: non-positive curvature p^H A p");
      alpha = rnorm2 / curvature;
      axpy(alpha, direction, result.solution);
      axpy(-alpha, e, residual);
      const double rnorm2_next = norm2_sq(residual);
      beta = rnorm2_next / rnorm2;
      rnorm2 = rnorm2_next;
      xpay(residual, beta, direction);
    }
    result.history.alphas.push_back(alpha);
    result.history.betas.push_back(beta);
    if (options.keep_trace) result.trace.push_back(result.solution);
    if (options.on_iteration) options.on_iteration(k, alpha, beta);
  }
  return result;
}

}  // namespace

CgResult cg_solve(const HermitianMatrix& a, const ComplexVector& b,
                  std::size_t iters, const IterOptions& options) {
  if (a.dim() != b.size()) throw std::invalid_argument("cg_solve: dimension mismatch");
  return cg_core([&a](const ComplexVector& v) { return matvec(a, v); }, b, iters, options);
}

CgResult cg_solve_op(const std::function<ComplexVector(const ComplexVector&)>& apply_a,
                     const ComplexVector& b, std::size_t iters, const IterOptions& options) {
  return cg_core(apply_a, b, iters, options);
}

namespace {

// Shared CGLS loop over abstract forward/adjoint products. `fwd` maps the
// solution space (n) into the residual space (m); `adj` maps back.
CglsResult cgls_core(std::size_t n, const ComplexVector& b,
                     const std::function<ComplexVector(const ComplexVector&)>& fwd,
                     const std::function<ComplexVector(const ComplexVector&)>& adj,
                     std::size_t iters, const IterOptions& options, bool count_first_adj) {
  if (iters < 1) throw std::invalid_argument("cgls_solve: need at least one iteration");

  CglsResult result;
  result.solution.assign(n, cplx(0.0, 0.0));
  ComplexVector residual = b;

  ComplexVector s;
  {
    // The first adjoint product is the matched filter H^H y.
    ScopedStage stage(count_first_adj ? Stage::kMatchedFilter : Stage::kCglsIteration);
    s = adj(residual);
  }

  ScopedStage stage(Stage::kCglsIteration);
  ComplexVector direction = s;
  double gamma = norm2_sq(s);
  const double gamma_initial = gamma;

  for (std::size_t k = 1; k <= iters; ++k) {
    double alpha = 1.0, beta = 0.0;
    if (!frozen(gamma, gamma_initial)) {
      ComplexVector q = fwd(direction);
      const double qnorm2 = norm2_sq(q);
      if (qnorm2 < kCurvatureTol)
        throw SolverBreakdown("cgls_solve: vanishing forward product");
      alpha = gamma / qnorm2;
      axpy(alpha, direction, result.solution);
      axpy(-alpha, q, residual);
      s = adj(residual);
      const double gamma_next = norm2_sq(s);
      beta = gamma_next / gamma;
      gamma = gamma_next;
      xpay(s, beta, direction);
    }
    result.history.alphas.push_back(alpha);
    result.history.betas.push_back(beta);
    if (options.keep_trace) result.trace.push_back(result.solution);
    if (options.on_iteration) options.on_iteration(k, alpha, beta);
  }
  return result;
}

}  // namespace

CglsResult cgls_solve(const ComplexMatrix& h, const ComplexVector& b,
                      std::size_t iters, const IterOptions& options) {
  if (h.rows() != b.size()) throw std::invalid_argument("cgls_solve: dimension mismatch");
  auto fwd = [&h](const ComplexVector& v) { return matvec(h, v); };
  auto adj = [&h](const ComplexVector& v) { return matvec_adjoint(h, v); };
  return cgls_core(h.cols(), b, fwd, adj, iters, options, /*count_first_adj=*/false);
}

CglsResult cgls_solve_regularized(const ComplexMatrix& h, double rho_inv,
                                  const ComplexVector& y, std::size_t iters,
                                  const IterOptions& options) {
  if (h.rows() != y.size()) throw std::invalid_argument("cgls_solve_regularized: dimension mismatch");
  if (rho_inv < 0.0) throw std::invalid_argument("cgls_solve_regularized: negative regularizer");
  const std::size_t rows = h.rows();
  const std::size_t n = h.cols();
  const double aug = std::sqrt(rho_inv);

  ComplexVector y_aug(rows + n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < rows; ++i) y_aug[i] = y[i];

  // Residual-space vectors carry rows + n entries; the augmentation block is
  // a real scaling rather than a dense product.
  auto fwd = [&h, rows, n, aug](const ComplexVector& v) {
    ComplexVector q(rows + n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < rows; ++i) {
      cplx acc(0.0, 0.0);
      const cplx* row = h.row(i);
      for (std::size_t j = 0; j < n; ++j) acc += row[j] * v[j];
      q[i] = acc;
    }
    for (std::size_t j = 0; j < n; ++j) q[rows + j] = aug * v[j];
    opcount::record(4ull * rows * n + 2ull * n);
    return q;
  };
  auto first_call = std::make_shared<bool>(true);
  auto adj = [&h, rows, n, aug, first_call](const ComplexVector& r) {
    ComplexVector s(n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < rows; ++i) {
      const cplx* row = h.row(i);
      const cplx ri = r[i];
      for (std::size_t j = 0; j < n; ++j) s[j] += std::conj(row[j]) * ri;
    }
    if (*first_call) {
      // Initial matched filter H^H y: the augmentation block of the residual
      // is structurally zero, so it is skipped outright.
      *first_call = false;
      opcount::record(4ull * rows * n);
    } else {
      for (std::size_t j = 0; j < n; ++j) s[j] += aug * r[rows + j];
      opcount::record(4ull * rows * n + 2ull * n);
    }
    return s;
  };
  return cgls_core(n, y_aug, fwd, adj, iters, options, /*count_first_adj=*/true);
}

MinNormResult cgls_solve_min_norm(const ComplexMatrix& h, double rho_inv,
                                  const ComplexVector& t, std::size_t iters,
                                  bool keep_trace) {
  if (h.rows() != t.size()) throw std::invalid_argument("cgls_solve_min_norm: dimension mismatch");
  if (iters < 1) throw std::invalid_argument("cgls_solve_min_norm: need at least one iteration");
  const std::size_t u = h.rows();
  const std::size_t b_dim = h.cols();

  ScopedStage stage(Stage::kCglsIteration);
  MinNormResult result;
  result.solution.assign(b_dim, cplx(0.0, 0.0));
  ComplexVector inner(u, cplx(0.0, 0.0));  // CG iterate on the outer system
  ComplexVector residual = t;
  ComplexVector direction = residual;
  double rnorm2 = norm2_sq(residual);
  const double rnorm2_initial = rnorm2;

  for (std::size_t k = 1; k <= iters; ++k) {
    double alpha = 1.0, beta = 0.0;
    if (!frozen(rnorm2, rnorm2_initial)) {
      ComplexVector w = matvec_adjoint(h, direction);  // H^H p, reused below
      ComplexVector e = matvec(h, w);                  // (H H^H) p
      axpy(rho_inv, direction, e);
      const double curvature = real_part_checked(dot_h(direction, e), "cgls_solve_min_norm");
      if (curvature < kCurvatureTol)
        throw SolverBreakdown("cgls_solve_min_norm: non-positive curvature");
      alpha = rnorm2 / curvature;
      axpy(alpha, direction, inner);
      axpy(alpha, w, result.solution);
      axpy(-alpha, e, residual);
      const double rnorm2_next = norm2_sq(residual);
      beta = rnorm2_next / rnorm2;
      rnorm2 = rnorm2_next;
      xpay(residual, beta, direction);
    }
    result.history.alphas.push_back(alpha);
    result.history.betas.push_back(beta);
    if (keep_trace) result.trace.push_back(result.solution);
  }
  return result;
}

ComplexMatrix cholesky_factor(const HermitianMatrix& a) {
  ScopedStage stage(Stage::kCholesky);
  const std::size_t n = a.dim();
  ComplexMatrix m(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a.diag(j);
    for (std::size_t k = 0; k < j; ++k) {
      const cplx v = m(j, k);
      d -= v.real() * v.real() + v.imag() * v.imag();
    }
    opcount::record(2ull * j);
    if (!(d > 0.0))
      throw NotPositiveDefinite("cholesky_factor: non-positive pivot");
    const double piv = std::sqrt(d);
    m(j, j) = piv;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a.at(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * std::conj(m(j, k));
      m(i, j) = s / piv;
    }
    opcount::record(4ull * j * (n - j - 1));
  }
  return m;
}

void solve_lower(const ComplexMatrix& m, ComplexVector& x) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= m(i, k) * x[k];
    x[i] = s / m(i, i).real();
  }
  opcount::record(2ull * n * (n - 1));
}

void solve_upper_adjoint(const ComplexMatrix& m, ComplexVector& x) {
  const std::size_t n = m.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    cplx s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(m(k, ii)) * x[k];
    x[ii] = s / m(ii, ii).real();
  }
  opcount::record(2ull * n * (n - 1));
}

ComplexMatrix cholesky_inverse(const HermitianMatrix& a) {
  const std::size_t n = a.dim();
  const ComplexMatrix m = cholesky_factor(a);

  ScopedStage stage(Stage::kSubstitution);
  ComplexMatrix inv(n, n);
  ComplexVector col(n);
  for (std::size_t c = 0; c < n; ++c) {
    // Forward solve M z = e_c; z vanishes above row c.
    for (std::size_t i = 0; i < c; ++i) col[i] = 0.0;
    col[c] = 1.0 / m(c, c).real();
    for (std::size_t i = c + 1; i < n; ++i) {
      cplx s(0.0, 0.0);
      for (std::size_t k = c; k < i; ++k) s -= m(i, k) * col[k];
      col[i] = s / m(i, i).real();
    }
    opcount::record(2ull * (n - c) * (n - c - 1));
    // Backward solve M^H x = z, full column.
    for (std::size_t ii = n; ii-- > 0;) {
      cplx s = col[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(m(k, ii)) * col[k];
      col[ii] = s / m(ii, ii).real();
    }
    opcount::record(2ull * n * (n - 1));
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  return inv;
}

ComplexMatrix neumann_inverse(const HermitianMatrix& a, std::size_t terms) {
  if (terms < 1) throw std::invalid_argument("neumann_inverse: need at least one term");
  ScopedStage stage(Stage::kNeumannTerm);
  const std::size_t n = a.dim();

  std::vector<double> inv_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.diag(i);
    if (std::abs(d) < 1e-300)
      throw std::domain_error("neumann_inverse: zero diagonal entry");
    inv_d[i] = 1.0 / d;
  }

  ComplexMatrix sum(n, n);
  for (std::size_t i = 0; i < n; ++i) sum(i, i) = inv_d[i];
  if (terms == 1) return sum;

  // T = -D^-1 E (zero diagonal), term_2 = T D^-1.
  ComplexMatrix t(n, n);
  ComplexMatrix term(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      t(i, j) = -inv_d[i] * a.at(i, j);
      term(i, j) = t(i, j) * inv_d[j];
    }
  }
  opcount::record(4ull * n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sum(i, j) += term(i, j);

  // Every series term is Hermitian, so higher products fill one triangle.
  for (std::size_t extra = 2; extra < terms; ++extra) {
    ComplexMatrix next(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        cplx s(0.0, 0.0);
        for (std::size_t k = 0; k < n; ++k) s += t(i, k) * term(k, j);
        next(i, j) = s;
        if (j != i) next(j, i) = std::conj(s);
      }
    }
    opcount::record(2ull * n * n * (n + 1));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sum(i, j) += next(i, j);
    term = next;
  }
  return sum;
}

}  // namespace cgmimo::solvers
