#include "mlsq/experiment.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "mlsq/partition.hpp"

namespace mlsq {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_finite(const DenseMatrix& a, const char* what) {
  for (double v : a.data())
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite entry");
}

void check_finite(const DenseVector& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError(std::string(what) + ": non-finite entry");
}

}  // namespace

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, SeededRng& rng) {
  DenseMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = rng.next_gaussian();
  return a;
}

DenseVector gaussian_vector(std::size_t len, SeededRng& rng) {
  DenseVector v(len);
  for (std::size_t i = 0; i < len; ++i) v[i] = rng.next_gaussian();
  return v;
}

GeneratedProblem generate_problem(const ProblemSpec& spec) {
  if (spec.n == 0 || spec.m < spec.n)
    throw PreconditionError("generate_problem: need m >= n >= 1");
  SeededRng rng(spec.seed, kStreamProblem);
  GeneratedProblem prob;
  prob.a = gaussian_matrix(spec.m, spec.n, rng);
  check_finite(prob.a, "generate_problem");
  const DenseVector z = gaussian_vector(spec.n, rng);
  prob.b = matvec(prob.a, z);
  if (!spec.consistent) {
    if (spec.m == spec.n) {
      std::cerr << "warning: inconsistent rhs requested with m == n; the range "
                   "complement is empty, so the rhs stays consistent\n";
    } else {
      const DenseMatrix basis = range_complement_basis(prob.a);
      const DenseVector ones(spec.m - spec.n, 1.0);
      const DenseVector shift = matvec(basis, ones);
      for (std::size_t i = 0; i < spec.m; ++i) prob.b[i] += shift[i];
    }
  }
  check_finite(prob.b, "generate_problem");
  prob.x_star = least_squares_solution(prob.a, prob.b);
  return prob;
}

void ExperimentSpec::validate() const {
  if (problem.n == 0 || problem.m < problem.n)
    throw ConfigError("experiment spec: need m >= n >= 1");
  if (row_block_size == 0 || row_block_size > problem.m)
    throw ConfigError("experiment spec: row block size must lie in [1, m]");
  if (col_block_size == 0 || col_block_size > problem.n)
    throw ConfigError("experiment spec: col block size must lie in [1, n]");
  if (trials == 0) throw ConfigError("experiment spec: trials must be >= 1");
  if (trials > 999)
    throw ConfigError("experiment spec: trials above 999 would collide rng streams");
  if (max_iterations == 0) throw ConfigError("experiment spec: iterations must be >= 1");
  if (record_every == 0) throw ConfigError("experiment spec: record_every must be >= 1");
  schedule.validate();
  if (schedule.total_iterations() < max_iterations)
    throw ConfigError("experiment spec: schedule covers fewer iterations than requested");
  if (overlay_bound && !schedule.is_constant())
    throw ConfigError("experiment spec: the bound overlay is defined for constant steps only");
  if (overlay_bound && rho_samples < 100)
    throw ConfigError("experiment spec: rho_samples must be >= 100");
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const GeneratedProblem prob = generate_problem(spec.problem);
  const Partition row_part = contiguous_partition(spec.problem.m, spec.row_block_size);
  const Partition col_part = contiguous_partition(spec.problem.n, spec.col_block_size);
  const PairSampler sampler(row_part, col_part);

  SolverConfig config;
  config.schedule = spec.schedule;
  config.max_iterations = spec.max_iterations;
  config.rates = spec.rates;
  config.mask_mode = spec.mask_mode;
  config.gradient = GradientKind::Corrected;
  config.record_every = spec.record_every;
  config.validate();

  ExperimentResult result;
  for (std::size_t k = 0; k <= spec.max_iterations; k += spec.record_every) {
    result.iterations.push_back(k);
  }
  if (result.iterations.back() != spec.max_iterations)
    result.iterations.push_back(spec.max_iterations);
  const std::size_t checkpoints = result.iterations.size();

  result.per_trial_errors.assign(spec.trials, std::vector<double>());
  result.trial_diverged.assign(spec.trials, 0);
  std::vector<std::string> trial_failures(spec.trials);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t trial = 0; trial < static_cast<std::int64_t>(spec.trials); ++trial) {
    const std::size_t t = static_cast<std::size_t>(trial);
    try {
      IterateTrace trace =
          run(prob.a, prob.b, sampler, config,
              SeededRng(spec.problem.seed, kStreamMaskBase + t),
              SeededRng(spec.problem.seed, kStreamPairBase + t), prob.x_star);
      result.per_trial_errors[t] = std::move(trace.relative_errors);
    } catch (const DivergenceError&) {
      result.trial_diverged[t] = 1;
      result.per_trial_errors[t].assign(checkpoints,
                                        std::numeric_limits<double>::quiet_NaN());
    } catch (const std::exception& e) {
      trial_failures[t] = e.what();
    }
  }
  for (const std::string& failure : trial_failures)
    if (!failure.empty()) throw NumericalError("run_experiment: trial failed: " + failure);

  std::size_t alive = 0;
  for (std::uint8_t flag : result.trial_diverged)
    if (!flag) ++alive;
  if (alive == 0) throw NumericalError("run_experiment: every trial diverged");

  result.mean_relative_error.assign(checkpoints, 0.0);
  for (std::size_t c = 0; c < checkpoints; ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < spec.trials; ++t)
      if (!result.trial_diverged[t]) sum += result.per_trial_errors[t][c];
    result.mean_relative_error[c] = sum / static_cast<double>(alive);
  }

  if (spec.overlay_bound) {
    const TheoryConstants constants =
        compute_theory_constants(prob.a, prob.b, prob.x_star, spec.rates, sampler,
                                 spec.rho_samples, spec.problem.seed);
    const double alpha = spec.schedule.constant_step();
    const double ref_sq = norm2_squared(prob.x_star);
    try {
      result.bound_overlay.resize(checkpoints);
      for (std::size_t c = 0; c < checkpoints; ++c)
        result.bound_overlay[c] =
            bound_curve(constants, alpha, ref_sq, result.iterations[c]) / ref_sq;
    } catch (const PreconditionError&) {
      throw ConfigError("run_experiment: constant step " + fmt_double(alpha) +
                        " is not below the estimated ceiling " +
                        fmt_double(constants.alpha_max));
    }
    result.constants = constants;
  }
  return result;
}

void emit_csv(const ExperimentResult& result, const std::string& path) {
  if (result.checkpoints() == 0 || result.trials() == 0)
    throw PreconditionError("emit_csv: empty result");
  std::ofstream out(path);
  if (!out) throw IoError("emit_csv: cannot open " + path);
  out << "iteration,mean_rel_err";
  for (std::size_t t = 0; t < result.trials(); ++t) out << ",trial_" << (t + 1);
  if (!result.bound_overlay.empty()) out << ",bound";
  out << "\n";
  for (std::size_t c = 0; c < result.checkpoints(); ++c) {
    out << result.iterations[c] << ',' << fmt_double(result.mean_relative_error[c]);
    for (std::size_t t = 0; t < result.trials(); ++t)
      out << ',' << fmt_double(result.per_trial_errors[t][c]);
    if (!result.bound_overlay.empty()) out << ',' << fmt_double(result.bound_overlay[c]);
    out << "\n";
  }
  out.flush();
  if (!out) throw IoError("emit_csv: write failed for " + path);
}

namespace {

struct Series {
  const char* label;
  const char* color;
  const char* dash;  // nullptr for solid
  const std::vector<double>* values;
};

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void emit_svg_plot(const ExperimentResult& result, const std::string& path, bool log_y) {
  if (result.checkpoints() == 0) throw PreconditionError("emit_svg_plot: empty result");
  constexpr double kWidth = 960.0, kHeight = 600.0;
  constexpr double kLeft = 72.0, kRight = 940.0, kTop = 24.0, kBottom = 548.0;
  constexpr double kClamp = 1e-30;

  std::vector<Series> series;
  series.push_back({"mean", "#1f77b4", nullptr, &result.mean_relative_error});
  if (!result.bound_overlay.empty())
    series.push_back({"bound", "#d62728", "6 3", &result.bound_overlay});

  bool clamped = false;
  auto transform = [&](double v) {
    if (!log_y) return v;
    if (!(v > 0.0)) {
      clamped = true;
      v = kClamp;
    }
    return std::log10(v);
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> transformed(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    transformed[s].reserve(result.checkpoints());
    for (double v : *series[s].values) {
      const double t = transform(v);
      transformed[s].push_back(t);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double x_max = static_cast<double>(result.iterations.back());
  const double x_span = x_max > 0.0 ? x_max : 1.0;

  auto px = [&](double iter) { return kLeft + (iter / x_span) * (kRight - kLeft); };
  auto py = [&](double t) { return kBottom - (t - lo) / (hi - lo) * (kBottom - kTop); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
      << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";

  // x ticks: five evenly spaced values.
  for (int t = 0; t <= 4; ++t) {
    const double iter = x_max * t / 4.0;
    const double xx = px(iter);
    svg << "<line x1=\"" << fmt_coord(xx) << "\" y1=\"" << kBottom << "\" x2=\""
        << fmt_coord(xx) << "\" y2=\"" << kBottom + 6 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fmt_coord(xx) << "\" y=\"" << kBottom + 22
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt_tick(iter) << "</text>\n";
  }
  // y ticks: integer decades when on a log axis, else five linear steps.
  if (log_y) {
    const int e_lo = static_cast<int>(std::ceil(lo));
    const int e_hi = static_cast<int>(std::floor(hi));
    const int step = std::max(1, (e_hi - e_lo) / 8);
    for (int e = e_lo; e <= e_hi; e += step) {
      const double yy = py(e);
      svg << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << fmt_coord(yy) << "\" x2=\"" << kLeft
          << "\" y2=\"" << fmt_coord(yy) << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << kLeft - 10 << "\" y=\"" << fmt_coord(yy + 4)
          << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
  } else {
    for (int t = 0; t <= 4; ++t) {
      const double v = lo + (hi - lo) * t / 4.0;
      const double yy = py(v);
      svg << "<line x1=\"" << kLeft - 6 << "\" y1=\"" << fmt_coord(yy) << "\" x2=\"" << kLeft
          << "\" y2=\"" << fmt_coord(yy) << "\" stroke=\"black\"/>\n";
      svg << "<text x=\"" << kLeft - 10 << "\" y=\"" << fmt_coord(yy + 4)
          << "\" font-size=\"12\" text-anchor=\"end\">" << fmt_tick(v) << "</text>\n";
    }
  }
  svg << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 12
      << "\" font-size=\"14\" text-anchor=\"middle\">iteration</text>\n";
  svg << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (kTop + kBottom) / 2 << ")\">relative error" << (log_y ? " (log10)" : "")
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    svg << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\"";
    if (series[s].dash) svg << " stroke-dasharray=\"" << series[s].dash << "\"";
    svg << " points=\"";
    for (std::size_t c = 0; c < result.checkpoints(); ++c) {
      if (c) svg << ' ';
      svg << fmt_coord(px(static_cast<double>(result.iterations[c]))) << ','
          << fmt_coord(py(transformed[s][c]));
    }
    svg << "\"/>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const double ly = kTop + 18.0 + 18.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kRight - 150 << "\" y1=\"" << fmt_coord(ly) << "\" x2=\""
        << kRight - 120 << "\" y2=\"" << fmt_coord(ly) << "\" stroke=\"" << series[s].color
        << "\" stroke-width=\"1.5\"";
    if (series[s].dash) svg << " stroke-dasharray=\"" << series[s].dash << "\"";
    svg << "/>\n";
    svg << "<text x=\"" << kRight - 112 << "\" y=\"" << fmt_coord(ly + 4)
        << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }

  if (clamped)
    svg << "<text x=\"" << kLeft + 6 << "\" y=\"" << kTop + 12
        << "\" font-size=\"12\" fill=\"#a00000\">warning: nonpositive values clamped to 1e-30"
        << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_svg_plot: cannot open " + path);
  const std::string body = svg.str();
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("emit_svg_plot: write failed for " + path);
}

void write_problem_file(const std::string& path, const ProblemSpec& spec,
                        const DenseMatrix& a, const DenseVector& b) {
  if (a.rows() != spec.m || a.cols() != spec.n || b.size() != spec.m)
    throw PreconditionError("write_problem_file: spec does not match data");
  std::ofstream out(path);
  if (!out) throw IoError("write_problem_file: cannot open " + path);
  out << spec.m << ' ' << spec.n << ' ' << spec.seed << ' '
      << (spec.consistent ? 1 : 0) << "\n";
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ' ';
      out << fmt_double(a(i, j));
    }
    out << "\n";
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) out << ' ';
    out << fmt_double(b[i]);
  }
  out << "\n";
  out.flush();
  if (!out) throw IoError("write_problem_file: write failed for " + path);
}

ProblemFile read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_problem_file: cannot open " + path);
  ProblemFile file;
  int consistent = 0;
  if (!(in >> file.spec.m >> file.spec.n >> file.spec.seed >> consistent))
    throw IoError("read_problem_file: malformed header in " + path);
  file.spec.consistent = consistent != 0;
  if (file.spec.n == 0 || file.spec.m < file.spec.n)
    throw IoError("read_problem_file: invalid dimensions in " + path);
  file.a = DenseMatrix(file.spec.m, file.spec.n);
  for (double& v : file.a.data())
    if (!(in >> v)) throw IoError("read_problem_file: truncated matrix in " + path);
  file.b.assign(file.spec.m, 0.0);
  for (double& v : file.b)
    if (!(in >> v)) throw IoError("read_problem_file: truncated rhs in " + path);
  return file;
}

}  // namespace mlsq
