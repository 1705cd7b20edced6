#pragma once

#include "mlsq/dense.hpp"

// Plain single-threaded reference kernels. The OpenMP kernels in dense.cpp
// compute every output element with the same serial summation order, so the
// two must agree bitwise; tests and the benchmark target compare them.
namespace mlsq::ref {

DenseVector matvec(const DenseMatrix& a, const DenseVector& x);
DenseVector matvec_transpose(const DenseMatrix& a, const DenseVector& y);
DenseMatrix gram(const DenseMatrix& a);

}  // namespace mlsq::ref
