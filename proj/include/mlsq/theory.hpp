#pragma once

#include <cstddef>
#include <cstdint>

#include "mlsq/dense.hpp"
#include "mlsq/mask.hpp"
#include "mlsq/partition.hpp"

namespace mlsq {

// Constants of the constant-step-size convergence bound
//
//   E ||x_k - x*||^2 <= (1 - 2 a sigma_min^2/(s t) + 2 a^2 rho)^k ||x0 - x*||^2
//                       + a C / (sigma_min^2 - a s t rho),
//
// valid for 0 < a < sigma_min^2 / (s t rho). Here rho is the spectral norm
// of the expected squared random update map and C (noise_bound) uniformly
// bounds s t times the expected squared gradient norm at the solution.
struct TheoryConstants {
  double sigma_min = 0.0;
  double rho = 0.0;
  double rho_stderr = 0.0;
  double noise_bound = 0.0;
  double alpha_max = 0.0;  // sigma_min^2 / (s t rho)
  std::size_t row_blocks = 1;
  std::size_t col_blocks = 1;
};

// Closed form for C:
//   C = 2/p^2 ||A||_F^2 ||A x* - b||^2 + 2(1-q)/(p^2 q) ||A||_F^2 ||b||^2
//       + 2(1-p)/p^3 ||A||_F^2 x*^T diag(A^T A) x*
//       + 2(1-p)^2/p^3 ||diag(A^T A) x*||^2.
// Zero exactly when p = q = 1 and the residual vanishes.
double gradient_noise_bound(const DenseMatrix& a, const DenseVector& b,
                            const DenseVector& x_star, const ObservationRates& rates);

struct RhoEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of rho = || E[W^T W] ||_2, where W is the random
// linear map applied to the iterate inside the corrected gradient:
//
//   W = 1/p^2 * embed(ahat(I,J)^T ahat(I,:)) - (1-p)/p^2 * diag(of the same),
//
// for an independently masked matrix and a uniformly sampled block pair.
// Samples are split into 10 batches on streams kStreamRhoBatchBase + batch;
// the standard error comes from the spectral norms of the batch averages.
// The batch layout is fixed, so the result does not depend on thread count.
RhoEstimate estimate_rho(const DenseMatrix& a, const ObservationRates& rates,
                         const PairSampler& sampler, std::size_t num_samples,
                         std::uint64_t seed);

// sigma_min^2 / (s t rho).
double step_size_ceiling(const TheoryConstants& constants);

// Bound value at iteration k for admissible alpha; the geometric factor is
// accumulated in the log domain so large k does not underflow prematurely.
double bound_curve(const TheoryConstants& constants, double alpha,
                   double initial_error_sq, std::size_t iteration);

TheoryConstants compute_theory_constants(const DenseMatrix& a, const DenseVector& b,
                                         const DenseVector& x_star,
                                         const ObservationRates& rates,
                                         const PairSampler& sampler,
                                         std::size_t rho_samples, std::uint64_t seed);

}  // namespace mlsq
