#include "mlsq/dense.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace mlsq {

namespace {

// Work threshold below which the OpenMP kernels stay single threaded.
constexpr std::int64_t kParallelCutoff = 1 << 15;

void require(bool cond, const char* msg) {
  if (!cond) throw PreconditionError(msg);
}

}  // namespace

double dot(const DenseVector& a, const DenseVector& b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2_squared(const DenseVector& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

double norm2(const DenseVector& a) { return std::sqrt(norm2_squared(a)); }

DenseVector matvec(const DenseMatrix& a, const DenseVector& x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
  DenseVector y(a.rows(), 0.0);
#pragma omp parallel for if (m * n >= kParallelCutoff)
  for (std::int64_t i = 0; i < m; ++i) {
    const double* row = a.row(static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::int64_t k = 0; k < n; ++k) s += row[k] * x[static_cast<std::size_t>(k)];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

DenseVector matvec_transpose(const DenseMatrix& a, const DenseVector& y) {
  require(a.rows() == y.size(), "matvec_transpose: dimension mismatch");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
  DenseVector out(a.cols(), 0.0);
#pragma omp parallel for if (m * n >= kParallelCutoff)
  for (std::int64_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::int64_t i = 0; i < m; ++i)
      s += a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
           y[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(j)] = s;
  }
  return out;
}

DenseMatrix gram(const DenseMatrix& a) {
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::int64_t n = static_cast<std::int64_t>(a.cols());
  DenseMatrix g(a.cols(), a.cols());
#pragma omp parallel for schedule(dynamic, 8) if (m * n * n >= kParallelCutoff)
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t k = j; k < n; ++k) {
      double s = 0.0;
      for (std::int64_t i = 0; i < m; ++i)
        s += a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
             a(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
      g(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) = s;
      g(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) = s;
    }
  }
  return g;
}

double frobenius_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

namespace {

// Householder vector for x = packed(k:m, k): overwrites the tail with the
// reflector (leading 1 implicit), returns tau and leaves the new R diagonal
// in packed(k, k).
double make_householder(DenseMatrix& packed, std::size_t k) {
  const std::size_t m = packed.rows();
  const double x0 = packed(k, k);
  double sigma = 0.0;
  for (std::size_t i = k + 1; i < m; ++i) sigma += packed(i, k) * packed(i, k);

  if (sigma == 0.0) {
    if (x0 < 0.0) {
      packed(k, k) = -x0;
      return 2.0;  // reflector is e1
    }
    return 0.0;
  }
  const double mu = std::sqrt(x0 * x0 + sigma);
  // v = x - mu e1; for x0 > 0 the leading component is computed as
  // -sigma / (x0 + mu) to avoid cancellation. Either way Hx = mu e1.
  const double v0 = (x0 <= 0.0) ? x0 - mu : -sigma / (x0 + mu);
  const double tau = 2.0 * v0 * v0 / (sigma + v0 * v0);
  for (std::size_t i = k + 1; i < m; ++i) packed(i, k) /= v0;
  packed(k, k) = mu;
  return tau;
}

// Applies I - tau v v^T (v = packed(k+1:m, k) with leading 1) to rows k..m-1
// of columns [col_begin, col_end) of target.
void apply_reflector(const DenseMatrix& packed, std::size_t k, double tau,
                     DenseMatrix& target, std::size_t col_begin, std::size_t col_end) {
  if (tau == 0.0) return;
  const std::size_t m = packed.rows();
  const std::int64_t jb = static_cast<std::int64_t>(col_begin);
  const std::int64_t je = static_cast<std::int64_t>(col_end);
  const std::int64_t work = (je - jb) * static_cast<std::int64_t>(m - k);
#pragma omp parallel for if (work >= kParallelCutoff)
  for (std::int64_t j = jb; j < je; ++j) {
    const std::size_t jj = static_cast<std::size_t>(j);
    double s = target(k, jj);
    for (std::size_t i = k + 1; i < m; ++i) s += packed(i, k) * target(i, jj);
    s *= tau;
    target(k, jj) -= s;
    for (std::size_t i = k + 1; i < m; ++i) target(i, jj) -= s * packed(i, k);
  }
}

}  // namespace

QrFactorization qr_factorize(const DenseMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw PreconditionError("qr_factorize: need rows >= cols >= 1");
  const std::size_t n = a.cols();
  const double source_norm = frobenius_norm(a);
  DenseMatrix packed = a;
  std::vector<double> tau(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    tau[k] = make_householder(packed, k);
    apply_reflector(packed, k, tau[k], packed, k + 1, n);
  }
  return QrFactorization(std::move(packed), std::move(tau), source_norm);
}

bool QrFactorization::full_column_rank(double tol_rel) const {
  const double tol = tol_rel * source_norm_;
  for (std::size_t k = 0; k < cols(); ++k)
    if (std::abs(packed_(k, k)) < tol) return false;
  return true;
}

void QrFactorization::require_full_column_rank(double tol_rel) const {
  if (!full_column_rank(tol_rel))
    throw SingularityError("matrix is numerically rank deficient");
}

void QrFactorization::apply_qt(DenseVector& y) const {
  if (y.size() != rows()) throw PreconditionError("apply_qt: dimension mismatch");
  const std::size_t m = rows();
  for (std::size_t k = 0; k < cols(); ++k) {
    if (tau_[k] == 0.0) continue;
    double s = y[k];
    for (std::size_t i = k + 1; i < m; ++i) s += packed_(i, k) * y[i];
    s *= tau_[k];
    y[k] -= s;
    for (std::size_t i = k + 1; i < m; ++i) y[i] -= s * packed_(i, k);
  }
}

DenseVector QrFactorization::solve(const DenseVector& b, double tol_rel) const {
  if (b.size() != rows()) throw PreconditionError("solve: dimension mismatch");
  require_full_column_rank(tol_rel);
  DenseVector y = b;
  apply_qt(y);
  const std::size_t n = cols();
  DenseVector x(n, 0.0);
  for (std::size_t kk = n; kk-- > 0;) {
    double s = y[kk];
    for (std::size_t j = kk + 1; j < n; ++j) s -= packed_(kk, j) * x[j];
    x[kk] = s / packed_(kk, kk);
  }
  return x;
}

DenseMatrix QrFactorization::full_q() const {
  const std::size_t m = rows();
  DenseMatrix q = DenseMatrix::identity(m);
  // Backward accumulation: columns left of k are still unit vectors with
  // support above row k, so each reflector only touches columns k..m-1.
  for (std::size_t kk = cols(); kk-- > 0;) {
    apply_reflector(packed_, kk, tau_[kk], q, kk, m);
  }
  return q;
}

DenseMatrix QrFactorization::r_factor() const {
  const std::size_t n = cols();
  DenseMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) r(i, j) = packed_(i, j);
  return r;
}

DenseVector least_squares_solution(const DenseMatrix& a, const DenseVector& b,
                                   double rank_tol_rel) {
  if (b.size() != a.rows())
    throw PreconditionError("least_squares_solution: dimension mismatch");
  return qr_factorize(a).solve(b, rank_tol_rel);
}

namespace {

double offdiagonal_norm(const DenseMatrix& g) {
  const std::size_t n = g.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * g(i, j) * g(i, j);
  return std::sqrt(s);
}

// Cyclic Jacobi on a symmetric matrix, in place; returns the diagonal once
// the off-diagonal norm drops below tol_abs.
std::vector<double> jacobi_eigenvalues_inplace(DenseMatrix& g, double tol_abs) {
  const std::size_t n = g.rows();
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (offdiagonal_norm(g) <= tol_abs) {
      std::vector<double> eigs(n);
      for (std::size_t i = 0; i < n; ++i) eigs[i] = g(i, i);
      return eigs;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = g(p, q);
        const double app = g(p, p);
        const double aqq = g(q, q);
        const double scale = std::abs(app) + std::abs(aqq);
        if (scale + std::abs(apq) == scale) {
          g(p, q) = g(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = g(k, p);
          const double akq = g(k, q);
          g(k, p) = g(p, k) = c * akp - s * akq;
          g(k, q) = g(q, k) = s * akp + c * akq;
        }
        g(p, p) = app - t * apq;
        g(q, q) = aqq + t * apq;
        g(p, q) = g(q, p) = 0.0;
      }
    }
  }
  throw NumericalError("jacobi eigensolver did not converge within 100 sweeps");
}

// Tiny local splitmix64 so the randomized power-iteration restarts do not
// pull the rng module into this kernel.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double power_iteration(const DenseMatrix& m, DenseVector v) {
  const std::size_t n = m.rows();
  double nv = norm2(v);
  if (nv == 0.0) return 0.0;
  for (double& x : v) x /= nv;
  DenseVector w(n, 0.0);
  double lambda = 0.0;
  constexpr int kMaxIters = 200000;
  constexpr double kRelTol = 1e-10;
  for (int it = 0; it < kMaxIters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = m.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      w[i] = s;
    }
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;  // v is in the kernel
    const double next = dot(v, w);
    const bool settled = it > 0 && std::abs(next - lambda) <= kRelTol * std::max(std::abs(next), 1e-300);
    lambda = next;
    if (settled) return lambda;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  throw NumericalError("power iteration did not converge");
}

}  // namespace

double smallest_singular_value(const DenseMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw PreconditionError("smallest_singular_value: need rows >= cols >= 1");
  DenseMatrix g = gram(a);
  const double tol = 1e-12 * frobenius_norm(g);
  const std::vector<double> eigs = jacobi_eigenvalues_inplace(g, tol);
  const double lo = *std::min_element(eigs.begin(), eigs.end());
  return std::sqrt(std::max(lo, 0.0));
}

double symmetric_spectral_norm(const DenseMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw PreconditionError("symmetric_spectral_norm: matrix must be square");
  const std::size_t n = m.rows();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = m(i, j) - m(j, i);
      asym += 2.0 * d * d;
    }
  const double scale = frobenius_norm(m);
  if (scale == 0.0) return 0.0;
  if (std::sqrt(asym) > 1e-8 * scale)
    throw PreconditionError("symmetric_spectral_norm: matrix is not symmetric");

  double best = power_iteration(m, DenseVector(n, 1.0));
  // The all-ones start can be orthogonal to the top eigenspace, in which
  // case the iteration stalls on a smaller eigenvalue; deterministic
  // randomized restarts catch that.
  std::uint64_t state = 0x51EDA1075EEDULL;
  for (int restart = 0; restart < 2; ++restart) {
    DenseVector v(n);
    for (std::size_t i = 0; i < n; ++i) {
      state = mix64(state);
      v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    best = std::max(best, power_iteration(m, std::move(v)));
  }
  return std::max(best, 0.0);
}

DenseMatrix range_complement_basis(const DenseMatrix& a) {
  if (a.rows() < a.cols() || a.cols() == 0)
    throw PreconditionError("range_complement_basis: need rows >= cols >= 1");
  QrFactorization f = qr_factorize(a);
  f.require_full_column_rank();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseMatrix basis(m, m - n);
  if (m == n) return basis;
  const DenseMatrix q = f.full_q();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = n; j < m; ++j) basis(i, j - n) = q(i, j);
  return basis;
}

}  // namespace mlsq
