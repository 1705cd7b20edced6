#pragma once

#include <string>

#include "mlsq/experiment.hpp"

namespace mlsq {

// Flat key-value experiment configuration, one `key = value` per line, `#`
// starts a comment. Keys: m, n, p, q, ell, tau, trials, iterations,
// mask_mode (fixed_per_trial | fresh_per_iteration), seed, consistent,
// record_every, overlay_bound, rho_samples, and either a constant step
// `alpha` or ladder stages `stage_1 = beta,T`, `stage_2 = ...` (exactly one
// of the two). parse_config(serialize_config(spec)) == spec for valid specs.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentSpec& spec);

}  // namespace mlsq
