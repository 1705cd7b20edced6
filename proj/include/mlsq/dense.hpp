#pragma once

#include <cstddef>
#include <vector>

#include "mlsq/errors.hpp"

namespace mlsq {

// Row-major dense matrix of 64-bit reals. Row blocks are contiguous, which
// the solver relies on when it reads sampled row submatrices in place.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using DenseVector = std::vector<double>;

// Rank tolerance on the R diagonal of a QR factorization, relative to ||A||_F.
inline constexpr double kQrRankTolRel = 1e-12;

double dot(const DenseVector& a, const DenseVector& b);
double norm2_squared(const DenseVector& a);
double norm2(const DenseVector& a);

DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseVector matvec_transpose(const DenseMatrix& a, const DenseVector& y);

// A^T A.
DenseMatrix gram(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);

// Householder QR of a tall matrix. R lives in the upper triangle of the
// packed factor, the reflector tails below the diagonal (leading 1 implicit).
class QrFactorization {
 public:
  QrFactorization(DenseMatrix packed, std::vector<double> tau, double source_norm)
      : packed_(std::move(packed)), tau_(std::move(tau)), source_norm_(source_norm) {}

  std::size_t rows() const noexcept { return packed_.rows(); }
  std::size_t cols() const noexcept { return packed_.cols(); }
  double r_diag(std::size_t k) const { return packed_(k, k); }
  double source_frobenius_norm() const noexcept { return source_norm_; }

  bool full_column_rank(double tol_rel = kQrRankTolRel) const;
  void require_full_column_rank(double tol_rel = kQrRankTolRel) const;

  // y <- Q^T y, y of length rows().
  void apply_qt(DenseVector& y) const;

  // Least squares solve via R^-1 Q^T b; throws SingularityError when rank deficient.
  DenseVector solve(const DenseVector& b, double tol_rel = kQrRankTolRel) const;

  // Full m x m orthogonal factor.
  DenseMatrix full_q() const;

  // n x n upper-triangular factor.
  DenseMatrix r_factor() const;

 private:
  DenseMatrix packed_;
  std::vector<double> tau_;
  double source_norm_ = 0.0;
};

QrFactorization qr_factorize(const DenseMatrix& a);

DenseVector least_squares_solution(const DenseMatrix& a, const DenseVector& b,
                                   double rank_tol_rel = kQrRankTolRel);

// sqrt of the smallest eigenvalue of A^T A, by cyclic Jacobi iteration.
double smallest_singular_value(const DenseMatrix& a);

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration; the all-ones start is cross-checked against randomized restarts
// so a start orthogonal to the top eigenspace cannot go unnoticed.
double symmetric_spectral_norm(const DenseMatrix& m);

// Orthonormal basis of the orthogonal complement of ran(A): the trailing
// m - n columns of the full Q factor. Empty (m x 0) when m == n.
DenseMatrix range_complement_basis(const DenseMatrix& a);

}  // namespace mlsq
