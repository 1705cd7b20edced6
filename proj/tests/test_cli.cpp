#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <vector>

#include "mlsq/cli.hpp"
#include "mlsq/config.hpp"
#include "oracles.hpp"

using namespace mlsq;

namespace {

int run_cli(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"mlsq"};
  argv.insert(argv.end(), args);
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("generate writes a problem file that reads back") {
  CHECK(run_cli({"generate", "--m", "12", "--n", "4", "--seed", "5", "--inconsistent",
                 "--out", "cli_prob.txt"}) == 0);
  const ProblemFile file = read_problem_file("cli_prob.txt");
  CHECK(file.spec.m == 12);
  CHECK(file.spec.n == 4);
  CHECK(file.spec.seed == 5);
  CHECK(file.spec.consistent == false);
  std::remove("cli_prob.txt");
}

TEST_CASE("run writes a trace with the expected header") {
  CHECK(run_cli({"run", "--m", "20", "--n", "5", "--seed", "6", "--p", "0.9", "--q", "0.9",
                 "--row-block-size", "2", "--alpha", "0.001", "--iterations", "300",
                 "--record-every", "100", "--out", "cli_trace.csv"}) == 0);
  const auto rows = oracle::parse_csv("cli_trace.csv");
  REQUIRE(rows.size() == 5);  // header + k = 0,100,200,300
  CHECK(rows[0] == std::vector<std::string>{"iteration", "rel_err"});
  CHECK(rows[1][1] == "1");
  std::remove("cli_trace.csv");
}

TEST_CASE("experiment consumes a config file and emits csv and svg") {
  ExperimentSpec spec;
  spec.problem = ProblemSpec{24, 6, true, 7};
  spec.rates = ObservationRates(0.8, 0.9);
  spec.row_block_size = 4;
  spec.col_block_size = 6;
  spec.schedule = StepSchedule::constant(1e-3);
  spec.trials = 10;
  spec.max_iterations = 400;
  spec.mask_mode = MaskMode::FixedPerTrial;
  std::ofstream("cli_exp.cfg") << serialize_config(spec);

  CHECK(run_cli({"experiment", "--config", "cli_exp.cfg", "--csv", "cli_exp.csv", "--svg",
                 "cli_exp.svg"}) == 0);
  const auto rows = oracle::parse_csv("cli_exp.csv");
  REQUIRE(!rows.empty());
  CHECK(rows[0].size() == 12);  // iteration, mean, 10 trials
  CHECK(!oracle::read_file("cli_exp.svg").empty());

  // A flag passed alongside --config overrides the file value.
  CHECK(run_cli({"experiment", "--config", "cli_exp.cfg", "--trials", "3", "--csv",
                 "cli_exp.csv"}) == 0);
  CHECK(oracle::parse_csv("cli_exp.csv")[0].size() == 5);

  std::remove("cli_exp.cfg");
  std::remove("cli_exp.csv");
  std::remove("cli_exp.svg");
}

TEST_CASE("bound exits 1 above the ceiling and 0 below it") {
  CHECK(run_cli({"bound", "--m", "20", "--n", "4", "--seed", "8", "--alpha", "10",
                 "--rho-samples", "1000", "--out", "cli_bound.csv"}) == 1);
  CHECK(run_cli({"bound", "--m", "20", "--n", "4", "--seed", "8", "--alpha", "0.0005",
                 "--rho-samples", "1000", "--iterations", "500", "--stride", "100",
                 "--out", "cli_bound.csv"}) == 0);
  const auto rows = oracle::parse_csv("cli_bound.csv");
  REQUIRE(rows.size() == 7);  // header + k = 0..500
  CHECK(rows[0] == std::vector<std::string>{"iteration", "bound"});
  std::remove("cli_bound.csv");
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({}) == 1);
  CHECK(run_cli({"run", "--no-such-flag", "3"}) == 1);
  CHECK(run_cli({"repro", "fig9"}) == 1);
  CHECK(run_cli({"experiment", "--config", "missing.cfg"}) == 1);
}

TEST_CASE("numerical failures exit with code 2") {
  // A divergent step size on a single-trial run.
  CHECK(run_cli({"run", "--m", "20", "--n", "5", "--seed", "6", "--alpha", "50",
                 "--iterations", "2000", "--out", "cli_div.csv"}) == 2);
  std::remove("cli_div.csv");
}

TEST_CASE("repro recipes pin the documented shapes") {
  const auto fig1 = repro_figure_specs("fig1", 10, 1);
  CHECK(fig1.size() == 6);
  for (const auto& [label, spec] : fig1) {
    CHECK(spec.problem.m == 1000);
    CHECK(spec.problem.n == 200);
    CHECK(spec.row_block_size == 2);
    CHECK(spec.col_block_size == 200);
    CHECK(spec.max_iterations == 200000);
    CHECK(spec.schedule.constant_step() == 1e-4);
    CHECK(spec.trials == 10);
  }

  const auto fig2 = repro_figure_specs("fig2", 10, 1);
  CHECK(fig2.size() == 6);
  for (const auto& [label, spec] : fig2) {
    CHECK(spec.rates == ObservationRates(0.9, 0.9));
  }

  const auto fig3 = repro_figure_specs("fig3", 10, 1);
  CHECK(fig3.size() == 2);
  for (const auto& [label, spec] : fig3) {
    CHECK(spec.schedule.total_iterations() == 200000);
    CHECK(spec.max_iterations == 200000);
    CHECK(spec.schedule.stages().size() == 3);
  }
  CHECK_THROWS_AS(repro_figure_specs("fig7", 10, 1), ConfigError);
}
