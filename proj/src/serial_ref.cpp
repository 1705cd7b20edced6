#include "mlsq/serial_ref.hpp"

namespace mlsq::ref {

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  if (a.cols() != x.size()) throw PreconditionError("ref::matvec: dimension mismatch");
  DenseVector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * x[k];
    y[i] = s;
  }
  return y;
}

DenseVector matvec_transpose(const DenseMatrix& a, const DenseVector& y) {
  if (a.rows() != y.size())
    throw PreconditionError("ref::matvec_transpose: dimension mismatch");
  DenseVector out(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * y[i];
    out[j] = s;
  }
  return out;
}

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix g(a.cols(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    for (std::size_t k = j; k < a.cols(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, k);
      g(j, k) = s;
      g(k, j) = s;
    }
  }
  return g;
}

}  // namespace mlsq::ref
