#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mlsq/dense.hpp"
#include "mlsq/experiment.hpp"
#include "mlsq/serial_ref.hpp"
#include "mlsq/theory.hpp"

using namespace mlsq;

namespace {

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

TEST_CASE("parallel kernels match the serial reference bitwise") {
  SeededRng rng(81, 0);
  // Sizes straddle the parallel cutoff so both code paths are exercised.
  const std::size_t shapes[][2] = {{3, 5}, {40, 17}, {301, 211}, {513, 128}};
  for (const auto& shape : shapes) {
    const DenseMatrix a = gaussian_matrix(shape[0], shape[1], rng);
    const DenseVector x = gaussian_vector(shape[1], rng);
    const DenseVector y = gaussian_vector(shape[0], rng);
    CHECK(matvec(a, x) == ref::matvec(a, x));
    CHECK(matvec_transpose(a, y) == ref::matvec_transpose(a, y));
    CHECK(gram(a) == ref::gram(a));
  }
}

TEST_CASE("rho estimation does not depend on the thread count") {
  SeededRng rng(82, 0);
  const DenseMatrix a = gaussian_matrix(20, 6, rng);
  const PairSampler sampler(contiguous_partition(20, 4), contiguous_partition(6, 6));
  const ObservationRates rates(0.8, 0.9);
  set_threads(1);
  const RhoEstimate serial = estimate_rho(a, rates, sampler, 5000, 82);
  set_threads(max_threads());
  const RhoEstimate parallel = estimate_rho(a, rates, sampler, 5000, 82);
  CHECK(serial.value == parallel.value);
  CHECK(serial.std_error == parallel.std_error);
}

TEST_CASE("experiments do not depend on the thread count") {
  ExperimentSpec spec;
  spec.problem = ProblemSpec{30, 6, true, 83};
  spec.rates = ObservationRates(0.9, 0.9);
  spec.row_block_size = 3;
  spec.col_block_size = 6;
  spec.schedule = StepSchedule::constant(1e-3);
  spec.trials = 6;
  spec.max_iterations = 1000;
  spec.mask_mode = MaskMode::FreshPerIteration;
  set_threads(1);
  const ExperimentResult serial = run_experiment(spec);
  set_threads(max_threads());
  const ExperimentResult parallel = run_experiment(spec);
  CHECK(serial.mean_relative_error == parallel.mean_relative_error);
  CHECK(serial.per_trial_errors == parallel.per_trial_errors);
}

TEST_CASE("qr and least squares agree across thread counts") {
  SeededRng rng(84, 0);
  const DenseMatrix a = gaussian_matrix(300, 40, rng);
  const DenseVector b = gaussian_vector(300, rng);
  set_threads(1);
  const DenseVector xs = least_squares_solution(a, b);
  const DenseMatrix qs = qr_factorize(a).full_q();
  set_threads(max_threads());
  const DenseVector xp = least_squares_solution(a, b);
  const DenseMatrix qp = qr_factorize(a).full_q();
  CHECK(xs == xp);
  CHECK(qs == qp);
}
