#include "mlsq/theory.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "mlsq/rng.hpp"

namespace mlsq {

double gradient_noise_bound(const DenseMatrix& a, const DenseVector& b,
                            const DenseVector& x_star, const ObservationRates& rates) {
  if (b.size() != a.rows() || x_star.size() != a.cols())
    throw PreconditionError("gradient_noise_bound: dimension mismatch");
  const double p = rates.p;
  const double q = rates.q;

  const double fro_sq = [&] {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return s;
  }();

  const DenseVector ax = matvec(a, x_star);
  double residual_sq = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = ax[i] - b[i];
    residual_sq += d * d;
  }
  const double b_sq = norm2_squared(b);

  // diag(A^T A) is the vector of column norms squared.
  double quad = 0.0;      // x*^T diag(A^T A) x*
  double diag_x_sq = 0.0; // ||diag(A^T A) x*||^2
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double col_sq = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) col_sq += a(i, j) * a(i, j);
    quad += col_sq * x_star[j] * x_star[j];
    const double dx = col_sq * x_star[j];
    diag_x_sq += dx * dx;
  }

  const double p2 = p * p;
  const double p3 = p2 * p;
  return (2.0 / p2) * fro_sq * residual_sq +
         (2.0 * (1.0 - q) / (p2 * q)) * fro_sq * b_sq +
         (2.0 * (1.0 - p) / p3) * fro_sq * quad +
         (2.0 * (1.0 - p) * (1.0 - p) / p3) * diag_x_sq;
}

RhoEstimate estimate_rho(const DenseMatrix& a, const ObservationRates& rates,
                         const PairSampler& sampler, std::size_t num_samples,
                         std::uint64_t seed) {
  if (num_samples < 100)
    throw PreconditionError("estimate_rho: need at least 100 samples");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (sampler.row_partition().universe() != m || sampler.col_partition().universe() != n)
    throw PreconditionError("estimate_rho: sampler partitions do not match the matrix");

  constexpr std::size_t kBatches = 10;
  std::vector<std::size_t> batch_count(kBatches, num_samples / kBatches);
  for (std::size_t b = 0; b < num_samples % kBatches; ++b) ++batch_count[b];

  const double p = rates.p;
  const double inv_p2 = 1.0 / (p * p);
  const double compensation = (1.0 - p) * inv_p2;
  const std::size_t max_block = sampler.row_partition().max_block_size();

  std::vector<DenseMatrix> batch_sums(kBatches, DenseMatrix(n, n));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t batch = 0; batch < static_cast<std::int64_t>(kBatches); ++batch) {
    SeededRng rng(seed, kStreamRhoBatchBase + static_cast<std::uint64_t>(batch));
    std::vector<double> rows(max_block * n);
    std::vector<double> update_row(n);
    DenseMatrix& acc = batch_sums[static_cast<std::size_t>(batch)];
    for (std::size_t s = 0; s < batch_count[static_cast<std::size_t>(batch)]; ++s) {
      const auto [bi, bj] = sampler.sample(rng);
      const std::vector<std::size_t>& row_block = sampler.row_partition().block(bi);
      const std::vector<std::size_t>& col_block = sampler.col_partition().block(bj);
      const std::size_t br = row_block.size();
      for (std::size_t r = 0; r < br; ++r) {
        const double* src = a.row(row_block[r]);
        double* dst = rows.data() + r * n;
        for (std::size_t j = 0; j < n; ++j)
          dst[j] = rng.next_bernoulli(p) ? src[j] : 0.0;
      }
      // The update map is supported on the rows indexed by the column
      // block; accumulate W^T W as the sum of outer products of those rows.
      for (std::size_t j : col_block) {
        double col_norm_sq = 0.0;
        for (std::size_t r = 0; r < br; ++r) {
          const double v = rows[r * n + j];
          col_norm_sq += v * v;
        }
        for (std::size_t c = 0; c < n; ++c) {
          double s2 = 0.0;
          for (std::size_t r = 0; r < br; ++r) s2 += rows[r * n + j] * rows[r * n + c];
          update_row[c] = inv_p2 * s2;
        }
        update_row[j] -= compensation * col_norm_sq;
        for (std::size_t rr = 0; rr < n; ++rr) {
          const double w = update_row[rr];
          if (w == 0.0) continue;
          double* acc_row = acc.row(rr);
          for (std::size_t cc = 0; cc < n; ++cc) acc_row[cc] += w * update_row[cc];
        }
      }
    }
  }

  // Fixed-order reduction across batches keeps the result independent of
  // the thread count.
  DenseMatrix mean(n, n);
  for (std::size_t batch = 0; batch < kBatches; ++batch)
    for (std::size_t idx = 0; idx < n * n; ++idx)
      mean.data()[idx] += batch_sums[batch].data()[idx];
  const double inv_total = 1.0 / static_cast<double>(num_samples);
  for (double& v : mean.data()) v *= inv_total;

  RhoEstimate est;
  est.value = symmetric_spectral_norm(mean);

  std::vector<double> batch_norms(kBatches, 0.0);
  for (std::size_t batch = 0; batch < kBatches; ++batch) {
    DenseMatrix bm = batch_sums[batch];
    const double inv = 1.0 / static_cast<double>(batch_count[batch]);
    for (double& v : bm.data()) v *= inv;
    batch_norms[batch] = symmetric_spectral_norm(bm);
  }
  double mean_norm = 0.0;
  for (double v : batch_norms) mean_norm += v;
  mean_norm /= static_cast<double>(kBatches);
  double var = 0.0;
  for (double v : batch_norms) var += (v - mean_norm) * (v - mean_norm);
  var /= static_cast<double>(kBatches - 1);
  est.std_error = std::sqrt(var / static_cast<double>(kBatches));
  return est;
}

double step_size_ceiling(const TheoryConstants& constants) {
  if (!(constants.rho > 0.0)) throw PreconditionError("step_size_ceiling: rho must be positive");
  const double st = static_cast<double>(constants.row_blocks * constants.col_blocks);
  return constants.sigma_min * constants.sigma_min / (st * constants.rho);
}

double bound_curve(const TheoryConstants& constants, double alpha,
                   double initial_error_sq, std::size_t iteration) {
  if (initial_error_sq < 0.0)
    throw PreconditionError("bound_curve: initial error must be nonnegative");
  const double ceiling = step_size_ceiling(constants);
  if (!(alpha > 0.0) || alpha >= ceiling)
    throw PreconditionError("bound_curve: step size must lie strictly below the ceiling");
  const double st = static_cast<double>(constants.row_blocks * constants.col_blocks);
  const double sigma_sq = constants.sigma_min * constants.sigma_min;
  const double factor = 1.0 - 2.0 * alpha * sigma_sq / st + 2.0 * alpha * alpha * constants.rho;
  const double horizon = alpha * constants.noise_bound / (sigma_sq - alpha * st * constants.rho);
  double geometric = 1.0;
  if (iteration > 0) {
    geometric = factor <= 0.0
                    ? 0.0
                    : std::exp(static_cast<double>(iteration) * std::log(factor));
  }
  return geometric * initial_error_sq + horizon;
}

TheoryConstants compute_theory_constants(const DenseMatrix& a, const DenseVector& b,
                                         const DenseVector& x_star,
                                         const ObservationRates& rates,
                                         const PairSampler& sampler,
                                         std::size_t rho_samples, std::uint64_t seed) {
  TheoryConstants c;
  c.sigma_min = smallest_singular_value(a);
  const RhoEstimate rho = estimate_rho(a, rates, sampler, rho_samples, seed);
  c.rho = rho.value;
  c.rho_stderr = rho.std_error;
  c.noise_bound = gradient_noise_bound(a, b, x_star, rates);
  c.row_blocks = sampler.row_blocks();
  c.col_blocks = sampler.col_blocks();
  c.alpha_max = step_size_ceiling(c);
  return c;
}

}  // namespace mlsq
