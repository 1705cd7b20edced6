#include "mlsq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlsq {

StepSchedule StepSchedule::constant(double alpha) {
  StepSchedule s;
  s.alpha_ = alpha;
  s.validate();
  return s;
}

StepSchedule StepSchedule::piecewise(std::vector<ScheduleStage> stages) {
  StepSchedule s;
  s.alpha_ = 0.0;
  s.stages_ = std::move(stages);
  s.validate();
  return s;
}

void StepSchedule::validate() const {
  if (is_constant()) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
      throw ConfigError("step schedule: constant step must be positive and finite");
    return;
  }
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const ScheduleStage& st = stages_[i];
    if (!(st.step > 0.0) || !std::isfinite(st.step))
      throw ConfigError("step schedule: stage steps must be positive and finite");
    if (st.iterations == 0)
      throw ConfigError("step schedule: stage lengths must be positive");
    if (i > 0) {
      if (!(st.step < stages_[i - 1].step))
        throw ConfigError("step schedule: stage steps must be strictly decreasing");
      if (st.iterations < stages_[i - 1].iterations)
        throw ConfigError("step schedule: stage lengths must be nondecreasing");
    }
  }
}

double StepSchedule::constant_step() const {
  if (!is_constant()) throw PreconditionError("constant_step: schedule is piecewise");
  return alpha_;
}

double StepSchedule::at(std::size_t k) const {
  if (k == 0) throw PreconditionError("step_size_at: iterations are 1-based");
  if (is_constant()) {
    if (!(alpha_ > 0.0)) throw ConfigError("step schedule is unset");
    return alpha_;
  }
  std::size_t upto = 0;
  for (const ScheduleStage& st : stages_) {
    upto += st.iterations;
    if (k <= upto) return st.step;
  }
  throw ConfigError("step_size_at: iteration " + std::to_string(k) +
                    " is beyond the schedule");
}

std::size_t StepSchedule::total_iterations() const {
  if (is_constant()) return kUnbounded;
  std::size_t total = 0;
  for (const ScheduleStage& st : stages_) total += st.iterations;
  return total;
}

double step_size_at(const StepSchedule& schedule, std::size_t k) { return schedule.at(k); }

void SolverConfig::validate() const {
  schedule.validate();
  if (max_iterations == 0) throw ConfigError("solver config: max_iterations must be >= 1");
  if (record_every == 0) throw ConfigError("solver config: record_every must be >= 1");
  if (!(divergence_limit > 0.0)) throw ConfigError("solver config: divergence limit must be positive");
  if (schedule.total_iterations() < max_iterations)
    throw ConfigError("solver config: schedule covers fewer iterations than max_iterations");
}

namespace {

// Shared inner kernel of the corrected and naive block gradients. Rows of
// the sampled block are passed as pointers so the fixed-mask path reads the
// stored masked matrix in place while the fresh-mask path reads scratch
// rows. With p = q = 1 the corrected scaling factors are exact identities
// and the compensation term is skipped, so both paths run identical
// floating-point operations.
void block_gradient(const double* const* rows, const double* rhs, std::size_t block_rows,
                    std::size_t n, std::span<const std::size_t> col_block, const double* x,
                    double p, double q, bool corrected, double* row_scratch, double* g) {
  std::fill(g, g + n, 0.0);
  const double inv_p2 = 1.0 / (p * p);
  const double inv_pq = 1.0 / (p * q);
  const double compensation = (1.0 - p) * inv_p2;
  for (std::size_t r = 0; r < block_rows; ++r) {
    const double* row = rows[r];
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += row[k] * x[k];
    row_scratch[r] = corrected ? (s * inv_p2 - rhs[r] * inv_pq) : (s - rhs[r]);
  }
  for (std::size_t j : col_block) {
    double w = 0.0;
    for (std::size_t r = 0; r < block_rows; ++r) w += rows[r][j] * row_scratch[r];
    if (corrected && compensation != 0.0) {
      double col_norm_sq = 0.0;
      for (std::size_t r = 0; r < block_rows; ++r) col_norm_sq += rows[r][j] * rows[r][j];
      w -= compensation * col_norm_sq * x[j];
    }
    g[j] = w;
  }
}

void check_blocks(const MaskedMatrix& a_hat, const MaskedVector& b_hat, const DenseVector& x,
                  std::span<const std::size_t> row_block,
                  std::span<const std::size_t> col_block) {
  if (a_hat.rows() != b_hat.size() || a_hat.cols() != x.size())
    throw PreconditionError("gradient: dimension mismatch");
  if (row_block.empty() || col_block.empty())
    throw PreconditionError("gradient: empty index block");
  for (std::size_t i : row_block)
    if (i >= a_hat.rows()) throw PreconditionError("gradient: row index out of range");
  for (std::size_t j : col_block)
    if (j >= a_hat.cols()) throw PreconditionError("gradient: column index out of range");
}

DenseVector gradient_impl(const MaskedMatrix& a_hat, const MaskedVector& b_hat,
                          const DenseVector& x, std::span<const std::size_t> row_block,
                          std::span<const std::size_t> col_block, double p, double q,
                          bool corrected) {
  check_blocks(a_hat, b_hat, x, row_block, col_block);
  std::vector<const double*> rows(row_block.size());
  std::vector<double> rhs(row_block.size());
  for (std::size_t r = 0; r < row_block.size(); ++r) {
    rows[r] = a_hat.values.row(row_block[r]);
    rhs[r] = b_hat.values[row_block[r]];
  }
  std::vector<double> scratch(row_block.size());
  DenseVector g(x.size(), 0.0);
  block_gradient(rows.data(), rhs.data(), row_block.size(), x.size(), col_block, x.data(),
                 p, q, corrected, scratch.data(), g.data());
  return g;
}

}  // namespace

DenseVector stochastic_gradient(const MaskedMatrix& a_hat, const MaskedVector& b_hat,
                                const DenseVector& x, std::span<const std::size_t> row_block,
                                std::span<const std::size_t> col_block,
                                const ObservationRates& rates) {
  return gradient_impl(a_hat, b_hat, x, row_block, col_block, rates.p, rates.q, true);
}

DenseVector naive_gradient(const MaskedMatrix& a_hat, const MaskedVector& b_hat,
                           const DenseVector& x, std::span<const std::size_t> row_block,
                           std::span<const std::size_t> col_block) {
  return gradient_impl(a_hat, b_hat, x, row_block, col_block, 1.0, 1.0, false);
}

DenseVector sgd_step(const DenseVector& x, const DenseVector& gradient, double alpha) {
  if (x.size() != gradient.size()) throw PreconditionError("sgd_step: dimension mismatch");
  if (!(alpha > 0.0)) throw PreconditionError("sgd_step: step size must be positive");
  DenseVector next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] - alpha * gradient[i];
  return next;
}

DenseVector specialized_step(SpecialCase which, const MaskedMatrix& a_hat,
                             const MaskedVector& b_hat, const DenseVector& x,
                             std::size_t row, std::size_t col,
                             const ObservationRates& rates, double alpha) {
  const std::size_t m = a_hat.rows();
  const std::size_t n = a_hat.cols();
  if (b_hat.size() != m || x.size() != n)
    throw PreconditionError("specialized_step: dimension mismatch");
  if (!(alpha > 0.0)) throw PreconditionError("specialized_step: step size must be positive");
  const bool needs_row = which == SpecialCase::EntryUpdate || which == SpecialCase::RowUpdate;
  const bool needs_col = which == SpecialCase::EntryUpdate || which == SpecialCase::ColumnUpdate;
  if (needs_row && row >= m) throw PreconditionError("specialized_step: row index out of range");
  if (needs_col && col >= n) throw PreconditionError("specialized_step: column index out of range");

  const double p = rates.p;
  const double q = rates.q;
  const double inv_p2 = 1.0 / (p * p);
  const double inv_pq = 1.0 / (p * q);
  const double compensation = (1.0 - p) * inv_p2;
  DenseVector next = x;

  switch (which) {
    case SpecialCase::EntryUpdate: {
      const double* r = a_hat.values.row(row);
      double rx = 0.0;
      for (std::size_t k = 0; k < n; ++k) rx += r[k] * x[k];
      const double inner = rx * inv_p2 - b_hat.values[row] * inv_pq -
                           compensation * r[col] * x[col];
      next[col] -= alpha * (r[col] * inner);
      break;
    }
    case SpecialCase::RowUpdate: {
      const double* r = a_hat.values.row(row);
      double rx = 0.0;
      for (std::size_t k = 0; k < n; ++k) rx += r[k] * x[k];
      const double u = rx * inv_p2 - b_hat.values[row] * inv_pq;
      for (std::size_t j = 0; j < n; ++j) {
        const double gj = r[j] * u - compensation * (r[j] * r[j]) * x[j];
        next[j] -= alpha * gj;
      }
      break;
    }
    case SpecialCase::ColumnUpdate: {
      double scal = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double* r = a_hat.values.row(i);
        double rx = 0.0;
        for (std::size_t k = 0; k < n; ++k) rx += r[k] * x[k];
        const double inner = rx * inv_p2 - b_hat.values[i] * inv_pq -
                             compensation * r[col] * x[col];
        scal += r[col] * inner;
      }
      next[col] -= alpha * scal;
      break;
    }
    case SpecialCase::FullUpdate: {
      std::vector<double> v(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double* r = a_hat.values.row(i);
        double rx = 0.0;
        for (std::size_t k = 0; k < n; ++k) rx += r[k] * x[k];
        v[i] = rx * inv_p2 - b_hat.values[i] * inv_pq;
      }
      for (std::size_t j = 0; j < n; ++j) {
        double w = 0.0;
        for (std::size_t i = 0; i < m; ++i) w += a_hat.values(i, j) * v[i];
        if (compensation != 0.0) {
          double col_norm_sq = 0.0;
          for (std::size_t i = 0; i < m; ++i)
            col_norm_sq += a_hat.values(i, j) * a_hat.values(i, j);
          w -= compensation * col_norm_sq * x[j];
        }
        next[j] -= alpha * w;
      }
      break;
    }
  }
  return next;
}

IterateTrace run(const DenseMatrix& a, const DenseVector& b, const PairSampler& sampler,
                 const SolverConfig& config, SeededRng mask_rng, SeededRng pair_rng,
                 const DenseVector& reference) {
  config.validate();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw PreconditionError("run: rhs length does not match matrix rows");
  if (reference.size() != n)
    throw PreconditionError("run: reference length does not match matrix columns");
  if (sampler.row_partition().universe() != m || sampler.col_partition().universe() != n)
    throw PreconditionError("run: sampler partitions do not match matrix dimensions");
  const double ref_norm_sq = norm2_squared(reference);
  if (!(ref_norm_sq > 0.0))
    throw PreconditionError("run: reference solution must be nonzero");

  DenseVector x = config.initial_iterate.empty() ? DenseVector(n, 0.0) : config.initial_iterate;
  if (x.size() != n) throw PreconditionError("run: initial iterate has wrong length");

  const bool fresh = config.mask_mode == MaskMode::FreshPerIteration;
  const bool corrected = config.gradient == GradientKind::Corrected;
  const double p = config.rates.p;
  const double q = config.rates.q;

  MaskedMatrix a_hat;
  MaskedVector b_hat;
  if (!fresh) {
    a_hat = apply_mask_matrix(a, config.rates, mask_rng);
    b_hat = apply_mask_vector(b, q, mask_rng);
  }

  const std::size_t max_block = sampler.row_partition().max_block_size();
  std::vector<double> fresh_rows(fresh ? max_block * n : 0);
  std::vector<const double*> row_ptrs(max_block);
  std::vector<double> rhs(max_block);
  std::vector<double> scratch(max_block);
  DenseVector g(n, 0.0);

  IterateTrace trace;
  auto relative_error = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x[i] - reference[i];
      s += d * d;
    }
    return s / ref_norm_sq;
  };
  auto record = [&](std::size_t k) {
    const double rel = relative_error();
    if (!std::isfinite(rel) || rel > config.divergence_limit)
      throw DivergenceError("run: relative error " + std::to_string(rel) +
                            " exceeded the divergence limit at iteration " +
                            std::to_string(k));
    trace.iterations.push_back(k);
    trace.relative_errors.push_back(rel);
  };
  record(0);

  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    const auto [bi, bj] = sampler.sample(pair_rng);
    const std::vector<std::size_t>& row_block = sampler.row_partition().block(bi);
    const std::vector<std::size_t>& col_block = sampler.col_partition().block(bj);

    if (fresh) {
      // Fresh masks for the sampled rows only: row-major within the block,
      // then the block's rhs entries. Distributionally identical to masking
      // everything, since only these rows are read this iteration.
      for (std::size_t r = 0; r < row_block.size(); ++r) {
        const double* src = a.row(row_block[r]);
        double* dst = fresh_rows.data() + r * n;
        for (std::size_t j = 0; j < n; ++j)
          dst[j] = mask_rng.next_bernoulli(p) ? src[j] : 0.0;
        row_ptrs[r] = dst;
      }
      for (std::size_t r = 0; r < row_block.size(); ++r)
        rhs[r] = mask_rng.next_bernoulli(q) ? b[row_block[r]] : 0.0;
    } else {
      for (std::size_t r = 0; r < row_block.size(); ++r) {
        row_ptrs[r] = a_hat.values.row(row_block[r]);
        rhs[r] = b_hat.values[row_block[r]];
      }
    }

    block_gradient(row_ptrs.data(), rhs.data(), row_block.size(), n, col_block, x.data(),
                   p, q, corrected, scratch.data(), g.data());

    const double alpha = config.schedule.at(k);
    for (std::size_t i = 0; i < n; ++i) x[i] -= alpha * g[i];

    if (k % config.record_every == 0 || k == config.max_iterations) record(k);
  }

  trace.final_iterate = std::move(x);
  return trace;
}

}  // namespace mlsq
