#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mlsq/experiment.hpp"

namespace mlsq {

// Canned experiment recipes behind `repro fig1|fig2|fig3`, exposed so tests
// and the acceptance suite can run the same specs the CLI does. Returns
// (label, spec) pairs; labels are used in output file names.
std::vector<std::pair<std::string, ExperimentSpec>> repro_figure_specs(
    const std::string& figure, std::size_t trials, std::uint64_t seed);

// Entry point behind the `mlsq` binary. Exit codes: 0 success, 1 config or
// usage error, 2 numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace mlsq
