// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra used by the detection and precoding chains.
// All values are immutable after construction and the operations are pure
// functions, so everything here is safe to share across threads.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cgmimo {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  static ComplexMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  const cplx* row(std::size_t i) const { return a_.data() + i * cols_; }
  cplx* row(std::size_t i) { return a_.data() + i * cols_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

// Hermitian matrix stored as the packed lower triangle; the upper triangle is
// mirrored by conjugation on access, so M == M^H holds exactly and diagonal
// entries carry no imaginary part.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t dim);
  static HermitianMatrix identity(std::size_t n);

  std::size_t dim() const { return dim_; }

  cplx at(std::size_t i, std::size_t j) const {
    return j <= i ? tri_[index(i, j)] : std::conj(tri_[index(j, i)]);
  }
  // j <= i required; stores only the real part on the diagonal.
  void set(std::size_t i, std::size_t j, cplx value);

  double diag(std::size_t i) const { return tri_[index(i, i)].real(); }
  std::vector<double> real_diag() const;

  ComplexMatrix full() const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const { return i * (i + 1) / 2 + j; }
  std::size_t dim_ = 0;
  std::vector<cplx> tri_;
};

enum class GramSide { kUplink, kDownlink };

// Regularized Gram matrix: uplink H^H H + rho_inv I, downlink H H^H + rho_inv I.
// One triangle is computed (2BU^2 real multiplications). The same inner loops
// serve both sides so reciprocal channels produce bitwise-identical results.
HermitianMatrix gram_regularized(const ComplexMatrix& h, double rho_inv, GramSide side);

ComplexVector matvec(const ComplexMatrix& m, const ComplexVector& v);
// m^H v without materializing the adjoint.
ComplexVector matvec_adjoint(const ComplexMatrix& m, const ComplexVector& v);
ComplexVector matvec(const HermitianMatrix& m, const ComplexVector& v);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix hermitian_of(const ComplexMatrix& m);

// u^H v (conjugates the first argument).
cplx dot_h(const ComplexVector& u, const ComplexVector& v);
double norm2_sq(const ComplexVector& v);
double norm2(const ComplexVector& v);

// y += a x for real and complex step sizes.
void axpy(double a, const ComplexVector& x, ComplexVector& y);
void axpy(cplx a, const ComplexVector& x, ComplexVector& y);
// y = x + a y (the CG direction update).
void xpay(const ComplexVector& x, double a, ComplexVector& y);
void scale(double a, ComplexVector& v);

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix sub(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace cgmimo
