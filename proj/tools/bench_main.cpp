// Benchmark comparing the serial reference kernels against the OpenMP ones,
// and single- versus multi-threaded Monte Carlo / multi-trial drivers. All
// parallel paths are deterministic by construction, so besides timing, each
// comparison asserts that both sides produce identical bits.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mlsq/dense.hpp"
#include "mlsq/experiment.hpp"
#include "mlsq/partition.hpp"
#include "mlsq/serial_ref.hpp"
#include "mlsq/theory.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

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

void report(const char* kernel, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-24s %10.1f ms %10.1f ms %8.2fx   %s\n", kernel, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, match ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;

  const int threads = max_threads();
  std::printf("threads available: %d\n", threads);
  std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  const std::size_t mv_m = quick ? 400 : 4000;
  const std::size_t mv_n = quick ? 200 : 1500;
  const int mv_reps = quick ? 5 : 20;
  mlsq::SeededRng rng(99, 0);
  const mlsq::DenseMatrix a = mlsq::gaussian_matrix(mv_m, mv_n, rng);
  const mlsq::DenseVector x = mlsq::gaussian_vector(mv_n, rng);

  {
    auto t0 = Clock::now();
    mlsq::DenseVector ys;
    for (int r = 0; r < mv_reps; ++r) ys = mlsq::ref::matvec(a, x);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    mlsq::DenseVector yp;
    for (int r = 0; r < mv_reps; ++r) yp = mlsq::matvec(a, x);
    report("matvec", serial_ms, ms_since(t0), ys == yp);
  }

  {
    const std::size_t gm = quick ? 300 : 1200;
    const std::size_t gn = quick ? 100 : 400;
    mlsq::SeededRng grng(100, 0);
    const mlsq::DenseMatrix g = mlsq::gaussian_matrix(gm, gn, grng);
    auto t0 = Clock::now();
    const mlsq::DenseMatrix gs = mlsq::ref::gram(g);
    const double serial_ms = ms_since(t0);
    t0 = Clock::now();
    const mlsq::DenseMatrix gp = mlsq::gram(g);
    report("gram", serial_ms, ms_since(t0), gs == gp);
  }

  {
    const std::size_t rm = quick ? 30 : 60;
    const std::size_t rn = quick ? 8 : 12;
    const std::size_t samples = quick ? 5000 : 100000;
    mlsq::SeededRng rrng(101, 0);
    const mlsq::DenseMatrix ra = mlsq::gaussian_matrix(rm, rn, rrng);
    const mlsq::PairSampler sampler(mlsq::contiguous_partition(rm, 5),
                                    mlsq::contiguous_partition(rn, rn));
    const mlsq::ObservationRates rates(0.8, 0.9);
    set_threads(1);
    auto t0 = Clock::now();
    const mlsq::RhoEstimate rs = mlsq::estimate_rho(ra, rates, sampler, samples, 7);
    const double serial_ms = ms_since(t0);
    set_threads(threads);
    t0 = Clock::now();
    const mlsq::RhoEstimate rp = mlsq::estimate_rho(ra, rates, sampler, samples, 7);
    report("estimate_rho", serial_ms, ms_since(t0),
           rs.value == rp.value && rs.std_error == rp.std_error);
  }

  {
    mlsq::ExperimentSpec spec;
    spec.problem = {quick ? std::size_t{100} : std::size_t{400},
                    quick ? std::size_t{20} : std::size_t{80}, true, 321};
    spec.rates = mlsq::ObservationRates(0.9, 0.9);
    spec.row_block_size = 2;
    spec.col_block_size = spec.problem.n;
    spec.schedule = mlsq::StepSchedule::constant(1e-4);
    spec.trials = 8;
    spec.max_iterations = quick ? 2000 : 20000;
    spec.mask_mode = mlsq::MaskMode::FixedPerTrial;
    set_threads(1);
    auto t0 = Clock::now();
    const mlsq::ExperimentResult es = mlsq::run_experiment(spec);
    const double serial_ms = ms_since(t0);
    set_threads(threads);
    t0 = Clock::now();
    const mlsq::ExperimentResult ep = mlsq::run_experiment(spec);
    report("run_experiment", serial_ms, ms_since(t0),
           es.mean_relative_error == ep.mean_relative_error &&
               es.per_trial_errors == ep.per_trial_errors);
  }

  return 0;
}
