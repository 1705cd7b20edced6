#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlsq/dense.hpp"
#include "mlsq/mask.hpp"
#include "mlsq/rng.hpp"
#include "mlsq/solver.hpp"
#include "mlsq/theory.hpp"

namespace mlsq {

struct ProblemSpec {
  std::size_t m = 0;
  std::size_t n = 0;
  bool consistent = true;  // rhs in the range of the matrix, or not
  std::uint64_t seed = 1;

  bool operator==(const ProblemSpec&) const = default;
};

struct GeneratedProblem {
  DenseMatrix a;
  DenseVector b;
  DenseVector x_star;  // least squares solution of the fully observed system
};

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, SeededRng& rng);
DenseVector gaussian_vector(std::size_t len, SeededRng& rng);

// A has i.i.d. standard normal entries from stream kStreamProblem of the
// seed; b = A z for a standard normal z, plus the all-ones combination of an
// orthonormal range-complement basis when an inconsistent system is asked
// for. With m == n the complement is empty: a warning is printed and the
// consistent rhs is returned.
GeneratedProblem generate_problem(const ProblemSpec& spec);

struct ExperimentSpec {
  ProblemSpec problem;
  ObservationRates rates;
  std::size_t row_block_size = 1;
  std::size_t col_block_size = 1;
  StepSchedule schedule;
  std::size_t trials = 10;
  std::size_t max_iterations = 1;
  MaskMode mask_mode = MaskMode::FixedPerTrial;
  bool overlay_bound = false;
  std::size_t record_every = 100;
  std::size_t rho_samples = 100000;  // only used when overlay_bound is set

  void validate() const;

  bool operator==(const ExperimentSpec&) const = default;
};

struct ExperimentResult {
  std::vector<std::size_t> iterations;
  std::vector<double> mean_relative_error;              // over non-diverged trials
  std::vector<std::vector<double>> per_trial_errors;    // trials x checkpoints
  std::vector<std::uint8_t> trial_diverged;
  std::vector<double> bound_overlay;                    // empty unless requested
  std::optional<TheoryConstants> constants;

  std::size_t checkpoints() const noexcept { return iterations.size(); }
  std::size_t trials() const noexcept { return per_trial_errors.size(); }
};

// Runs `trials` independent solver runs on per-trial rng streams, aggregates
// relative errors at the shared checkpoint grid, and optionally attaches the
// theoretical bound (normalized by ||x*||^2 for overlay against relative
// errors). Trials execute concurrently; aggregation is in trial order.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// CSV: header `iteration,mean_rel_err,trial_1,...,trial_T[,bound]`, LF line
// endings, floats with 17 significant digits (round-trip exact).
void emit_csv(const ExperimentResult& result, const std::string& path);

// Standalone SVG 1.1, one polyline per series (mean, optional bound), log10
// y-axis by default, labeled axes and legend. Deterministic bytes for
// identical input. Nonpositive values under a log axis are clamped to 1e-30
// and a warning annotation is added.
void emit_svg_plot(const ExperimentResult& result, const std::string& path,
                   bool log_y = true);

// Problem dump: text header "m n seed consistent", then whitespace-separated
// row-major A and then b, 17 significant digits.
void write_problem_file(const std::string& path, const ProblemSpec& spec,
                        const DenseMatrix& a, const DenseVector& b);

struct ProblemFile {
  ProblemSpec spec;
  DenseMatrix a;
  DenseVector b;
};

ProblemFile read_problem_file(const std::string& path);

}  // namespace mlsq
