#pragma once

// Test-only oracles, written independently of the library kernels they
// check: naive accumulation loops, Gaussian elimination, bisection on the
// characteristic polynomial, a plain Jacobi eigensolver, the explicit
// full-matrix route to the block gradient, and exact mask enumeration for
// the second-moment operator.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mlsq/dense.hpp"
#include "mlsq/mask.hpp"
#include "mlsq/partition.hpp"

namespace oracle {

using mlsq::DenseMatrix;
using mlsq::DenseVector;
using mlsq::MaskedMatrix;
using mlsq::MaskedVector;

inline DenseVector matvec_naive(const DenseMatrix& a, const DenseVector& x) {
  DenseVector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) y[i] += a(i, k) * x[k];
  return y;
}

// Least squares via the normal equations, solved by Gaussian elimination
// with partial pivoting.
inline DenseVector solve_normal_equations(const DenseMatrix& a, const DenseVector& b) {
  const std::size_t n = a.cols();
  DenseMatrix aug(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
      aug(i, j) = s;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * b[k];
    aug(i, n) = s;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(aug(r, col)) > std::abs(aug(piv, col))) piv = r;
    if (piv != col)
      for (std::size_t j = 0; j < n + 1; ++j) std::swap(aug(col, j), aug(piv, j));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = aug(r, col) / aug(col, col);
      for (std::size_t j = col; j < n + 1; ++j) aug(r, j) -= f * aug(col, j);
    }
  }
  DenseVector x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = aug(i, n);
    for (std::size_t j = i + 1; j < n; ++j) s -= aug(i, j) * x[j];
    x[i] = s / aug(i, i);
  }
  return x;
}

// det(G - lambda I) by elimination with partial pivoting, sign tracked.
inline double det_shifted(const DenseMatrix& g, double lambda) {
  const std::size_t n = g.rows();
  DenseMatrix m = g;
  for (std::size_t i = 0; i < n; ++i) m(i, i) -= lambda;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    if (m(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(col, j), m(piv, j));
      det = -det;
    }
    det *= m(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m(r, col) / m(col, col);
      for (std::size_t j = col; j < n; ++j) m(r, j) -= f * m(col, j);
    }
  }
  return det;
}

// Smallest eigenvalue of a symmetric positive definite matrix, located as
// the first sign change of the characteristic polynomial scanned from zero
// and then bisected.
inline double smallest_eigenvalue_bisect(const DenseMatrix& g) {
  const std::size_t n = g.rows();
  double upper = 0.0;  // Gershgorin bound
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(g(i, j));
    upper = std::max(upper, row);
  }
  const double d0 = det_shifted(g, 0.0);
  const int grid = 20000;
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (int s = 1; s <= grid; ++s) {
    const double lam = upper * static_cast<double>(s) / grid;
    const double d = det_shifted(g, lam);
    if (d == 0.0 || (d0 > 0) != (d > 0)) {
      lo = upper * static_cast<double>(s - 1) / grid;
      hi = lam;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return upper;  // should not happen for the seeded instances
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = det_shifted(g, mid);
    if (d == 0.0) return mid;
    if ((d > 0) == (d0 > 0))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Plain cyclic Jacobi eigensolver (test-side, independent of the library's).
inline std::vector<double> jacobi_eigenvalues(DenseMatrix g) {
  const std::size_t n = g.rows();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += g(i, j) * g(i, j);
    if (off <= 1e-26) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (g(p, q) == 0.0) continue;
        const double theta = (g(q, q) - g(p, p)) / (2.0 * g(p, q));
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double gkp = g(k, p), gkq = g(k, q);
          g(k, p) = c * gkp - s * gkq;
          g(k, q) = s * gkp + c * gkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double gpk = g(p, k), gqk = g(q, k);
          g(p, k) = c * gpk - s * gqk;
          g(q, k) = s * gpk + c * gqk;
        }
      }
    }
  }
  std::vector<double> eigs(n);
  for (std::size_t i = 0; i < n; ++i) eigs[i] = g(i, i);
  return eigs;
}

inline double spectral_norm_jacobi(const DenseMatrix& m) {
  const std::vector<double> eigs = jacobi_eigenvalues(m);
  double best = 0.0;
  for (double e : eigs) best = std::max(best, std::abs(e));
  return best;
}

// Block gradient the expensive way: form the full n x n embedded matrix
// M = I(:,J) ahat(I,J)^T ahat(I,:), take its literal diagonal, and evaluate
// the corrected direction term by term.
inline DenseVector explicit_gradient(const MaskedMatrix& ah, const MaskedVector& bh,
                                     const DenseVector& x,
                                     const std::vector<std::size_t>& row_block,
                                     const std::vector<std::size_t>& col_block, double p,
                                     double q) {
  const std::size_t n = ah.cols();
  const std::size_t bi = row_block.size();
  // E = I(:,J) ahat(I,J)^T, an n x |I| matrix.
  DenseMatrix embed(n, bi);
  for (std::size_t j : col_block)
    for (std::size_t r = 0; r < bi; ++r) embed(j, r) = ah.values(row_block[r], j);
  // M = E * ahat(I,:).
  DenseMatrix m(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < bi; ++r) s += embed(a, r) * ah.values(row_block[r], c);
      m(a, c) = s;
    }
  DenseVector g(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double term1 = 0.0;
    for (std::size_t c = 0; c < n; ++c) term1 += m(a, c) * x[c];
    double term2 = 0.0;
    for (std::size_t r = 0; r < bi; ++r) term2 += embed(a, r) * bh.values[row_block[r]];
    g[a] = term1 / (p * p) - term2 / (p * q) - (1.0 - p) / (p * p) * m(a, a) * x[a];
  }
  return g;
}

inline DenseVector explicit_naive_gradient(const MaskedMatrix& ah, const MaskedVector& bh,
                                           const DenseVector& x,
                                           const std::vector<std::size_t>& row_block,
                                           const std::vector<std::size_t>& col_block) {
  DenseVector g = explicit_gradient(ah, bh, x, row_block, col_block, 1.0, 1.0);
  return g;
}

// Exact E[W^T W] for the random update map, by enumerating every block pair
// and every observation pattern of the sampled rows. Exponential in
// |I| * n, so only usable at toy sizes.
inline DenseMatrix exhaustive_expected_update_moment(const DenseMatrix& a, double p,
                                                     const mlsq::PairSampler& sampler) {
  const std::size_t n = a.cols();
  const std::size_t s = sampler.row_blocks();
  const std::size_t t = sampler.col_blocks();
  DenseMatrix expected(n, n);
  for (std::size_t bi = 0; bi < s; ++bi) {
    const auto& rows = sampler.row_partition().block(bi);
    const std::size_t bits = rows.size() * n;
    for (std::size_t bj = 0; bj < t; ++bj) {
      const auto& cols = sampler.col_partition().block(bj);
      for (std::uint64_t pattern = 0; pattern < (1ull << bits); ++pattern) {
        double weight = 1.0 / static_cast<double>(s * t);
        DenseMatrix masked(rows.size(), n);
        for (std::size_t r = 0; r < rows.size(); ++r)
          for (std::size_t c = 0; c < n; ++c) {
            const bool keep = (pattern >> (r * n + c)) & 1ull;
            weight *= keep ? p : 1.0 - p;
            masked(r, c) = keep ? a(rows[r], c) : 0.0;
          }
        DenseMatrix w(n, n);
        for (std::size_t j : cols) {
          for (std::size_t c = 0; c < n; ++c) {
            double s2 = 0.0;
            for (std::size_t r = 0; r < rows.size(); ++r) s2 += masked(r, j) * masked(r, c);
            w(j, c) = s2 / (p * p);
            if (c == j) w(j, c) -= (1.0 - p) / (p * p) * s2;
          }
        }
        for (std::size_t aa = 0; aa < n; ++aa)
          for (std::size_t cc = 0; cc < n; ++cc) {
            double s2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) s2 += w(k, aa) * w(k, cc);
            expected(aa, cc) += weight * s2;
          }
      }
    }
  }
  return expected;
}

// Streaming mean / standard error per coordinate.
struct MomentAccumulator {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t count = 0;

  explicit MomentAccumulator(std::size_t dim) : sum(dim, 0.0), sum_sq(dim, 0.0) {}

  void add(const DenseVector& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum[i] += v[i];
      sum_sq[i] += v[i] * v[i];
    }
    ++count;
  }

  double mean(std::size_t i) const { return sum[i] / static_cast<double>(count); }

  double std_error(std::size_t i) const {
    const double m = mean(i);
    const double var =
        (sum_sq[i] / static_cast<double>(count) - m * m) * static_cast<double>(count) /
        static_cast<double>(count - 1);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(count));
  }
};

inline std::vector<std::vector<std::string>> parse_csv(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Points in the k-th polyline of an SVG document.
inline std::size_t svg_polyline_points(const std::string& svg, std::size_t which) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= which; ++i) {
    pos = svg.find("<polyline", pos);
    if (pos == std::string::npos) return 0;
    ++pos;
  }
  const std::size_t start = svg.find("points=\"", pos) + 8;
  const std::size_t end = svg.find('"', start);
  std::size_t count = 0;
  for (std::size_t i = start; i < end; ++i)
    if (svg[i] == ',') ++count;
  return count;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

}  // namespace oracle
