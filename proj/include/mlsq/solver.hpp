#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlsq/dense.hpp"
#include "mlsq/mask.hpp"
#include "mlsq/partition.hpp"
#include "mlsq/rng.hpp"

namespace mlsq {

// FixedPerTrial draws the observation masks once per run and keeps them;
// FreshPerIteration redraws the sampled rows' masks at every step, which is
// the regime the convergence bound is stated for.
enum class MaskMode { FixedPerTrial, FreshPerIteration };

// Corrected is the bias-corrected gradient; Naive applies the fully observed
// update formula to masked data unchanged (the biased baseline). The two
// coincide bitwise when p = q = 1.
enum class GradientKind { Corrected, Naive };

struct ScheduleStage {
  double step = 0.0;
  std::size_t iterations = 0;

  bool operator==(const ScheduleStage&) const = default;
};

// Constant step size, or a piecewise-constant ladder of strictly decreasing
// steps over nondecreasing stage lengths.
class StepSchedule {
 public:
  static constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

  StepSchedule() = default;  // invalid until assigned; validate() rejects it

  static StepSchedule constant(double alpha);
  static StepSchedule piecewise(std::vector<ScheduleStage> stages);

  bool is_constant() const noexcept { return stages_.empty(); }
  double constant_step() const;
  const std::vector<ScheduleStage>& stages() const noexcept { return stages_; }

  // Step size for 1-based iteration k; throws ConfigError past the ladder.
  double at(std::size_t k) const;

  std::size_t total_iterations() const;

  void validate() const;

  bool operator==(const StepSchedule&) const = default;

 private:
  double alpha_ = 0.0;
  std::vector<ScheduleStage> stages_;
};

double step_size_at(const StepSchedule& schedule, std::size_t k);

struct SolverConfig {
  StepSchedule schedule;
  std::size_t max_iterations = 1;
  ObservationRates rates;
  MaskMode mask_mode = MaskMode::FreshPerIteration;
  GradientKind gradient = GradientKind::Corrected;
  std::size_t record_every = 100;
  DenseVector initial_iterate;  // empty means the zero vector
  double divergence_limit = 1e12;

  void validate() const;
};

struct IterateTrace {
  std::vector<std::size_t> iterations;
  std::vector<double> relative_errors;  // ||x_k - x*||^2 / ||x*||^2
  DenseVector final_iterate;
};

// Bias-corrected stochastic gradient built from the sampled row block I and
// column block J. The result is supported on J (exact zeros elsewhere):
//
//   g_j = sum_{i in I} ahat(i,j) * (ahat(i,:).x / p^2 - bhat_i / (p q))
//         - (1-p)/p^2 * ||ahat(I,j)||^2 * x_j        for j in J.
//
// Cost O(|I| n + |I| |J|); no n x n matrix is formed.
DenseVector stochastic_gradient(const MaskedMatrix& a_hat, const MaskedVector& b_hat,
                                const DenseVector& x, std::span<const std::size_t> row_block,
                                std::span<const std::size_t> col_block,
                                const ObservationRates& rates);

// Biased baseline: g_j = sum_{i in I} ahat(i,j) * (ahat(i,:).x - bhat_i), j in J.
DenseVector naive_gradient(const MaskedMatrix& a_hat, const MaskedVector& b_hat,
                           const DenseVector& x, std::span<const std::size_t> row_block,
                           std::span<const std::size_t> col_block);

// x - alpha * g; only coordinates in the gradient's support change.
DenseVector sgd_step(const DenseVector& x, const DenseVector& gradient, double alpha);

// Closed-form single-step updates for the four degenerate partition shapes.
enum class SpecialCase {
  EntryUpdate,   // singleton row and column blocks
  RowUpdate,     // singleton row block, full column block
  ColumnUpdate,  // full row block, singleton column block
  FullUpdate,    // both blocks full
};

// Next iterate from one closed-form update. `row` is used by EntryUpdate and
// RowUpdate, `col` by EntryUpdate and ColumnUpdate; out-of-range indices are
// precondition errors. EntryUpdate and RowUpdate read a single stored row.
DenseVector specialized_step(SpecialCase which, const MaskedMatrix& a_hat,
                             const MaskedVector& b_hat, const DenseVector& x,
                             std::size_t row, std::size_t col,
                             const ObservationRates& rates, double alpha);

// One full solver run. Masks come from mask_rng (drawn once up front in
// FixedPerTrial mode; redrawn for the sampled rows each iteration in
// FreshPerIteration mode, matrix rows in block order and then their rhs
// entries), block pairs from pair_rng. The relative error against
// `reference` is recorded at iteration 0, every record_every iterations, and
// at the final iteration. A non-finite or > divergence_limit relative error
// raises DivergenceError.
IterateTrace run(const DenseMatrix& a, const DenseVector& b, const PairSampler& sampler,
                 const SolverConfig& config, SeededRng mask_rng, SeededRng pair_rng,
                 const DenseVector& reference);

}  // namespace mlsq
