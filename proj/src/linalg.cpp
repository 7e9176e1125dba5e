// SPDX-License-Identifier: Apache-2.0

#include "cgmimo/linalg.hpp"

#include <stdexcept>

#include "cgmimo/opcount.hpp"

namespace cgmimo {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), a_(rows * cols) {
  require(rows >= 1 && cols >= 1, "ComplexMatrix: empty dimensions");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

HermitianMatrix::HermitianMatrix(std::size_t dim)
    : dim_(dim), tri_(dim * (dim + 1) / 2) {
  require(dim >= 1, "HermitianMatrix: empty dimension");
}

HermitianMatrix HermitianMatrix::identity(std::size_t n) {
  HermitianMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, cplx value) {
  require(j <= i && i < dim_, "HermitianMatrix::set: upper-triangle write");
  tri_[index(i, j)] = (i == j) ? cplx(value.real(), 0.0) : value;
}

std::vector<double> HermitianMatrix::real_diag() const {
  std::vector<double> d(dim_);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = diag(i);
  return d;
}

ComplexMatrix HermitianMatrix::full() const {
  ComplexMatrix m(dim_, dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) m(i, j) = at(i, j);
  return m;
}

HermitianMatrix gram_regularized(const ComplexMatrix& h, double rho_inv, GramSide side) {
  require(rho_inv >= 0.0, "gram_regularized: negative regularizer");
  // Uplink pairs columns of H, downlink pairs rows of H^H-shaped input; both
  // reduce to the same sum over the long dimension.
  const std::size_t u = side == GramSide::kUplink ? h.cols() : h.rows();
  const std::size_t b = side == GramSide::kUplink ? h.rows() : h.cols();
  HermitianMatrix a(u);

  // Stage the effective columns as split real/imag planes so the pair dots
  // vectorize.
  std::vector<double> re(u * b), im(u * b);
  for (std::size_t i = 0; i < u; ++i) {
    double* ri = re.data() + i * b;
    double* mi = im.data() + i * b;
    for (std::size_t t = 0; t < b; ++t) {
      const cplx v = side == GramSide::kUplink ? h(t, i) : std::conj(h(i, t));
      ri[t] = v.real();
      mi[t] = v.imag();
    }
  }

  for (std::size_t i = 0; i < u; ++i) {
    const double* ri = re.data() + i * b;
    const double* mi = im.data() + i * b;
    for (std::size_t j = 0; j < i; ++j) {
      const double* rj = re.data() + j * b;
      const double* mj = im.data() + j * b;
      double sr = 0.0, si = 0.0;
      for (std::size_t t = 0; t < b; ++t) {
        // conj(h_i) * h_j accumulated in parts
        sr += ri[t] * rj[t] + mi[t] * mj[t];
        si += ri[t] * mj[t] - mi[t] * rj[t];
      }
      a.set(i, j, cplx(sr, si));
    }
    double d = 0.0;
    for (std::size_t t = 0; t < b; ++t) d += ri[t] * ri[t] + mi[t] * mi[t];
    a.set(i, i, d + rho_inv);
  }
  // Off-diagonal: 4B per entry; diagonal: 2B per entry => 2BU^2 total.
  opcount::record(4ull * b * u * (u - 1) / 2 + 2ull * b * u);
  return a;
}

ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& v) {
  require(m.cols() == v.size(), "matvec: dimension mismatch");
  ComplexVector y(m.rows(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx s(0.0, 0.0);
    const cplx* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) s += row[j] * v[j];
    y[i] = s;
  }
  opcount::record(4ull * m.rows() * m.cols());
  return y;
}

ComplexVector matvec_adjoint(const ComplexMatrix& m, const ComplexVector& v) {
  require(m.rows() == v.size(), "matvec_adjoint: dimension mismatch");
  ComplexVector y(m.cols(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const cplx* row = m.row(i);
    const cplx vi = v[i];
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += std::conj(row[j]) * vi;
  }
  opcount::record(4ull * m.rows() * m.cols());
  return y;
}

ComplexVector matvec(const HermitianMatrix& m, const ComplexVector& v) {
  require(m.dim() == v.size(), "matvec: dimension mismatch");
  const std::size_t n = m.dim();
  ComplexVector y(n, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    cplx s(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) s += m.at(i, j) * v[j];
    y[i] = s;
  }
  opcount::record(4ull * n * n);
  return y;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      const cplx* brow = b.row(k);
      cplx* crow = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  opcount::record(4ull * a.rows() * a.cols() * b.cols());
  return c;
}

ComplexMatrix hermitian_of(const ComplexMatrix& m) {
  ComplexMatrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = std::conj(m(i, j));
  return t;
}

cplx dot_h(const ComplexVector& u, const ComplexVector& v) {
  require(u.size() == v.size(), "dot_h: dimension mismatch");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  opcount::record(4ull * u.size());
  return s;
}

double norm2_sq(const ComplexVector& v) {
  double s = 0.0;
  for (const cplx& x : v) s += x.real() * x.real() + x.imag() * x.imag();
  opcount::record(2ull * v.size());
  return s;
}

double norm2(const ComplexVector& v) { return std::sqrt(norm2_sq(v)); }

void axpy(double a, const ComplexVector& x, ComplexVector& y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
  opcount::record(2ull * x.size());
}

void axpy(cplx a, const ComplexVector& x, ComplexVector& y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
  opcount::record(4ull * x.size());
}

void xpay(const ComplexVector& x, double a, ComplexVector& y) {
  require(x.size() == y.size(), "xpay: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * y[i];
  opcount::record(2ull * x.size());
}

void scale(double a, ComplexVector& v) {
  for (cplx& x : v) x *= a;
  opcount::record(2ull * v.size());
}

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: dimension mismatch");
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: dimension mismatch");
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

}  // namespace cgmimo
