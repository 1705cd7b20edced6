#include "mlsq/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mlsq/config.hpp"
#include "mlsq/errors.hpp"
#include "mlsq/partition.hpp"

namespace mlsq {

namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SpecOptions {
  std::size_t m = 100;
  std::size_t n = 20;
  std::uint64_t seed = 1;
  bool inconsistent = false;
  double p = 1.0;
  double q = 1.0;
  std::size_t ell = 1;
  std::size_t tau = 0;  // 0 means the full column range
  double alpha = 1e-4;
  std::vector<std::string> stages;
  std::size_t iterations = 10000;
  std::string mask_mode = "fixed";
  std::size_t record_every = 100;
  std::size_t trials = 10;
  std::size_t rho_samples = 100000;
  bool overlay_bound = false;
  std::string config_path;

  // Option handles, kept so config-file values are only overridden by flags
  // the user actually passed.
  CLI::Option* o_m = nullptr;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_inconsistent = nullptr;
  CLI::Option* o_p = nullptr;
  CLI::Option* o_q = nullptr;
  CLI::Option* o_ell = nullptr;
  CLI::Option* o_tau = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_stages = nullptr;
  CLI::Option* o_iterations = nullptr;
  CLI::Option* o_mask_mode = nullptr;
  CLI::Option* o_record_every = nullptr;
  CLI::Option* o_trials = nullptr;
};

void add_problem_options(CLI::App* cmd, SpecOptions& opt) {
  opt.o_m = cmd->add_option("--m", opt.m, "number of rows");
  opt.o_n = cmd->add_option("--n", opt.n, "number of columns");
  opt.o_seed = cmd->add_option("--seed", opt.seed, "master seed");
  opt.o_inconsistent = cmd->add_flag("--inconsistent", opt.inconsistent,
                                     "put a range-complement component into the rhs");
}

void add_solver_options(CLI::App* cmd, SpecOptions& opt) {
  opt.o_p = cmd->add_option("--p", opt.p, "matrix entry observation probability, (0,1]");
  opt.o_q = cmd->add_option("--q", opt.q, "rhs entry observation probability, (0,1]");
  opt.o_ell = cmd->add_option("--row-block-size", opt.ell, "row block size (1-based blocks of this size)");
  opt.o_tau = cmd->add_option("--col-block-size", opt.tau, "column block size; 0 or omitted means n");
  opt.o_alpha = cmd->add_option("--alpha", opt.alpha, "constant step size");
  opt.o_stages = cmd->add_option("--stage", opt.stages,
                                 "ladder stage 'beta,T'; repeat for more stages (overrides --alpha)");
  opt.o_iterations = cmd->add_option("--iterations", opt.iterations, "iterations per trial");
  opt.o_mask_mode = cmd->add_option("--mask-mode", opt.mask_mode,
                                    "fixed (one mask per trial) or fresh (new mask each iteration)")
                        ->check(CLI::IsMember({"fixed", "fresh"}));
  opt.o_record_every = cmd->add_option("--record-every", opt.record_every, "error logging stride");
}

ScheduleStage parse_stage_flag(const std::string& text) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos)
    throw ConfigError("--stage must look like beta,T, got: " + text);
  ScheduleStage stage;
  char* end = nullptr;
  stage.step = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + comma) throw ConfigError("--stage: malformed step in " + text);
  stage.iterations = static_cast<std::size_t>(std::strtoull(text.c_str() + comma + 1, &end, 10));
  if (*end != '\0') throw ConfigError("--stage: malformed length in " + text);
  return stage;
}

ExperimentSpec spec_from_options(const SpecOptions& opt) {
  ExperimentSpec spec;
  bool have_config = !opt.config_path.empty();
  if (have_config) spec = parse_config_file(opt.config_path);

  auto given = [&](const CLI::Option* o) { return !have_config || (o && o->count() > 0); };

  if (given(opt.o_m)) spec.problem.m = opt.m;
  if (given(opt.o_n)) spec.problem.n = opt.n;
  if (given(opt.o_seed)) spec.problem.seed = opt.seed;
  if (given(opt.o_inconsistent)) spec.problem.consistent = !opt.inconsistent;
  if (given(opt.o_p) || given(opt.o_q)) {
    const double p = given(opt.o_p) ? opt.p : spec.rates.p;
    const double q = given(opt.o_q) ? opt.q : spec.rates.q;
    if (!(p > 0.0) || p > 1.0 || !(q > 0.0) || q > 1.0)
      throw ConfigError("observation rates must lie in (0, 1]");
    spec.rates = ObservationRates(p, q);
  }
  if (given(opt.o_ell)) spec.row_block_size = opt.ell;
  if (given(opt.o_tau)) spec.col_block_size = opt.tau == 0 ? spec.problem.n : opt.tau;
  if (given(opt.o_iterations)) spec.max_iterations = opt.iterations;
  if (given(opt.o_mask_mode))
    spec.mask_mode =
        opt.mask_mode == "fresh" ? MaskMode::FreshPerIteration : MaskMode::FixedPerTrial;
  if (given(opt.o_record_every)) spec.record_every = opt.record_every;
  if (given(opt.o_trials)) spec.trials = opt.trials;

  if (opt.o_stages && opt.o_stages->count() > 0) {
    std::vector<ScheduleStage> stages;
    for (const std::string& s : opt.stages) stages.push_back(parse_stage_flag(s));
    spec.schedule = StepSchedule::piecewise(std::move(stages));
  } else if (given(opt.o_alpha)) {
    spec.schedule = StepSchedule::constant(opt.alpha);
  }
  return spec;
}

int cmd_generate(const SpecOptions& opt, const std::string& out_path) {
  ProblemSpec spec{opt.m, opt.n, !opt.inconsistent, opt.seed};
  const GeneratedProblem prob = generate_problem(spec);
  write_problem_file(out_path, spec, prob.a, prob.b);
  DenseVector residual = matvec(prob.a, prob.x_star);
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= prob.b[i];
  std::cout << "wrote " << out_path << " (m=" << spec.m << ", n=" << spec.n
            << ", residual norm " << fmt_double(norm2(residual)) << ")\n";
  return 0;
}

int cmd_run(const SpecOptions& opt, std::size_t trial, bool naive,
            const std::string& out_path) {
  ExperimentSpec spec = spec_from_options(opt);
  spec.trials = 1;
  spec.validate();
  const GeneratedProblem prob = generate_problem(spec.problem);
  const PairSampler sampler(contiguous_partition(spec.problem.m, spec.row_block_size),
                            contiguous_partition(spec.problem.n, spec.col_block_size));
  SolverConfig config;
  config.schedule = spec.schedule;
  config.max_iterations = spec.max_iterations;
  config.rates = spec.rates;
  config.mask_mode = spec.mask_mode;
  config.gradient = naive ? GradientKind::Naive : GradientKind::Corrected;
  config.record_every = spec.record_every;
  const IterateTrace trace =
      run(prob.a, prob.b, sampler, config,
          SeededRng(spec.problem.seed, kStreamMaskBase + trial),
          SeededRng(spec.problem.seed, kStreamPairBase + trial), prob.x_star);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("run: cannot open " + out_path);
    out = &file;
  }
  *out << "iteration,rel_err\n";
  for (std::size_t i = 0; i < trace.iterations.size(); ++i)
    *out << trace.iterations[i] << ',' << fmt_double(trace.relative_errors[i]) << "\n";
  return 0;
}

int cmd_experiment(const SpecOptions& opt, const std::string& csv_path,
                   const std::string& svg_path, bool linear_y) {
  ExperimentSpec spec = spec_from_options(opt);
  if (opt.overlay_bound) spec.overlay_bound = true;
  spec.rho_samples = opt.rho_samples;
  spec.validate();
  const ExperimentResult result = run_experiment(spec);
  if (!csv_path.empty()) emit_csv(result, csv_path);
  if (!svg_path.empty()) emit_svg_plot(result, svg_path, !linear_y);
  std::cout << "terminal mean relative error at iteration "
            << result.iterations.back() << ": "
            << fmt_double(result.mean_relative_error.back()) << "\n";
  if (result.constants) {
    const TheoryConstants& c = *result.constants;
    std::cout << "sigma_min=" << fmt_double(c.sigma_min) << " rho=" << fmt_double(c.rho)
              << " (stderr " << fmt_double(c.rho_stderr) << ") noise_bound="
              << fmt_double(c.noise_bound) << " alpha_max=" << fmt_double(c.alpha_max)
              << "\n";
  }
  std::size_t diverged = 0;
  for (std::uint8_t flag : result.trial_diverged) diverged += flag;
  if (diverged > 0)
    std::cout << diverged << " of " << result.trials() << " trials diverged\n";
  return 0;
}

int cmd_bound(const SpecOptions& opt, double alpha, std::size_t iterations,
              std::size_t stride, const std::string& out_path) {
  ProblemSpec pspec{opt.m, opt.n, !opt.inconsistent, opt.seed};
  const GeneratedProblem prob = generate_problem(pspec);
  const ObservationRates rates(opt.p, opt.q);
  const std::size_t tau = opt.tau == 0 ? opt.n : opt.tau;
  const PairSampler sampler(contiguous_partition(opt.m, opt.ell),
                            contiguous_partition(opt.n, tau));
  const TheoryConstants constants = compute_theory_constants(
      prob.a, prob.b, prob.x_star, rates, sampler, opt.rho_samples, opt.seed);
  std::cerr << "sigma_min=" << fmt_double(constants.sigma_min)
            << " rho=" << fmt_double(constants.rho) << " (stderr "
            << fmt_double(constants.rho_stderr) << ") noise_bound="
            << fmt_double(constants.noise_bound)
            << " ceiling=" << fmt_double(constants.alpha_max) << "\n";
  if (!(alpha > 0.0) || alpha >= constants.alpha_max) {
    std::cerr << "step size " << fmt_double(alpha)
              << " is not below the stability ceiling " << fmt_double(constants.alpha_max)
              << "\n";
    return 1;
  }
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("bound: cannot open " + out_path);
    out = &file;
  }
  const double initial = norm2_squared(prob.x_star);
  *out << "iteration,bound\n";
  for (std::size_t k = 0;; k += stride) {
    if (k > iterations) break;
    *out << k << ',' << fmt_double(bound_curve(constants, alpha, initial, k) / initial)
         << "\n";
    if (k == iterations || stride == 0) break;
  }
  return 0;
}

int cmd_repro(const std::string& figure, const std::string& outdir, std::size_t trials,
              std::uint64_t seed) {
  const auto specs = repro_figure_specs(figure, trials, seed);
  for (const auto& [label, spec] : specs) {
    const ExperimentResult result = run_experiment(spec);
    const std::string base = outdir + "/" + label;
    emit_csv(result, base + ".csv");
    emit_svg_plot(result, base + ".svg");
    std::cout << label << ": terminal mean relative error "
              << fmt_double(result.mean_relative_error.back()) << " (wrote " << base
              << ".csv, " << base << ".svg)\n";
  }
  return 0;
}

}  // namespace

std::vector<std::pair<std::string, ExperimentSpec>> repro_figure_specs(
    const std::string& figure, std::size_t trials, std::uint64_t seed) {
  ExperimentSpec base;
  base.problem = ProblemSpec{1000, 200, true, seed};
  base.row_block_size = 2;
  base.col_block_size = 200;
  base.trials = trials;
  base.max_iterations = 200000;
  base.mask_mode = MaskMode::FixedPerTrial;
  base.record_every = 100;

  const double alpha_mid = std::pow(10.0, -4.5);
  std::vector<std::pair<std::string, ExperimentSpec>> out;
  for (const bool consistent : {true, false}) {
    const std::string tag = consistent ? "consistent" : "inconsistent";
    ExperimentSpec spec = base;
    spec.problem.consistent = consistent;
    if (figure == "fig1") {
      spec.schedule = StepSchedule::constant(1e-4);
      for (const double rate : {1.0, 0.9, 0.7}) {
        spec.rates = ObservationRates(rate, rate);
        char label[64];
        std::snprintf(label, sizeof label, "fig1_%s_p%g_q%g", tag.c_str(), rate, rate);
        out.emplace_back(label, spec);
      }
    } else if (figure == "fig2") {
      // The step-size-proportional horizon needs the unbiased regime, so
      // masks are redrawn each iteration here and for fig3.
      spec.rates = ObservationRates(0.9, 0.9);
      spec.mask_mode = MaskMode::FreshPerIteration;
      const std::pair<const char*, double> alphas[] = {
          {"1e-4", 1e-4}, {"1e-4.5", alpha_mid}, {"1e-5", 1e-5}};
      for (const auto& [name, alpha] : alphas) {
        spec.schedule = StepSchedule::constant(alpha);
        out.emplace_back("fig2_" + tag + "_alpha" + name, spec);
      }
    } else if (figure == "fig3") {
      spec.rates = ObservationRates(0.9, 0.9);
      spec.mask_mode = MaskMode::FreshPerIteration;
      spec.schedule = StepSchedule::piecewise(
          {{1e-4, 30000}, {alpha_mid, 40000}, {1e-5, 130000}});
      out.emplace_back("fig3_" + tag, spec);
    } else {
      throw ConfigError("repro: unknown figure '" + figure + "' (use fig1, fig2, fig3)");
    }
  }
  return out;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"stochastic gradient descent for linear least squares with partially observed data"};
  app.require_subcommand(1);

  SpecOptions gen_opt;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "generate a synthetic problem and write it to a file");
  add_problem_options(gen, gen_opt);
  gen->add_option("--out", gen_out, "output path")->required();

  SpecOptions run_opt;
  std::size_t run_trial = 0;
  bool run_naive = false;
  std::string run_out;
  CLI::App* runc = app.add_subcommand("run", "single solver run, prints the error trace as CSV");
  add_problem_options(runc, run_opt);
  add_solver_options(runc, run_opt);
  runc->add_option("--config", run_opt.config_path, "config file; explicit flags override it");
  runc->add_option("--trial", run_trial, "trial stream index");
  runc->add_flag("--naive", run_naive, "use the uncorrected update on the masked data");
  runc->add_option("--out", run_out, "write the trace here instead of stdout");

  SpecOptions exp_opt;
  std::string exp_csv, exp_svg;
  bool exp_linear = false;
  CLI::App* exp = app.add_subcommand("experiment", "multi-trial averaged run with CSV/SVG output");
  add_problem_options(exp, exp_opt);
  add_solver_options(exp, exp_opt);
  exp_opt.o_trials = exp->add_option("--trials", exp_opt.trials, "number of independent trials");
  exp->add_option("--config", exp_opt.config_path, "config file; explicit flags override it");
  exp->add_option("--csv", exp_csv, "CSV output path");
  exp->add_option("--svg", exp_svg, "SVG plot output path");
  exp->add_flag("--overlay-bound", exp_opt.overlay_bound, "attach the theoretical bound curve");
  exp->add_option("--rho-samples", exp_opt.rho_samples, "Monte Carlo samples for the bound overlay");
  exp->add_flag("--linear-y", exp_linear, "linear instead of log y axis in the SVG");

  SpecOptions bound_opt;
  double bound_alpha = 0.0;
  std::size_t bound_iters = 20000, bound_stride = 100;
  std::string bound_out;
  CLI::App* bound = app.add_subcommand("bound", "print the constant-step relative-error bound curve as CSV");
  add_problem_options(bound, bound_opt);
  bound->add_option("--p", bound_opt.p, "matrix entry observation probability");
  bound->add_option("--q", bound_opt.q, "rhs entry observation probability");
  bound->add_option("--row-block-size", bound_opt.ell, "row block size");
  bound->add_option("--col-block-size", bound_opt.tau, "column block size; 0 means n");
  bound->add_option("--alpha", bound_alpha, "constant step size")->required();
  bound->add_option("--iterations", bound_iters, "last iteration to tabulate");
  bound->add_option("--stride", bound_stride, "iteration stride");
  bound->add_option("--rho-samples", bound_opt.rho_samples, "Monte Carlo samples for rho");
  bound->add_option("--out", bound_out, "write the table here instead of stdout");

  std::string repro_fig, repro_outdir = ".";
  std::size_t repro_trials = 10;
  std::uint64_t repro_seed = 12345;
  CLI::App* repro = app.add_subcommand("repro", "run a canned figure recipe (fig1, fig2, fig3)");
  repro->add_option("figure", repro_fig, "fig1, fig2, or fig3")->required();
  repro->add_option("--outdir", repro_outdir, "directory for CSV/SVG output");
  repro->add_option("--trials", repro_trials, "trials per configuration");
  repro->add_option("--seed", repro_seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_opt, gen_out);
    if (runc->parsed()) return cmd_run(run_opt, run_trial, run_naive, run_out);
    if (exp->parsed()) return cmd_experiment(exp_opt, exp_csv, exp_svg, exp_linear);
    if (bound->parsed())
      return cmd_bound(bound_opt, bound_alpha, bound_iters, bound_stride, bound_out);
    if (repro->parsed()) return cmd_repro(repro_fig, repro_outdir, repro_trials, repro_seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const SingularityError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace mlsq
