#include "mlsq/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mlsq {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

double parse_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("config: key '" + key + "' has a malformed number: " + value);
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || value[0] == '-')
    throw ConfigError("config: key '" + key + "' has a malformed count: " + value);
  return static_cast<std::size_t>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || value[0] == '-')
    throw ConfigError("config: key '" + key + "' has a malformed integer: " + value);
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' must be true or false, got: " + value);
}

MaskMode parse_mask_mode(const std::string& value) {
  if (value == "fixed_per_trial" || value == "fixed") return MaskMode::FixedPerTrial;
  if (value == "fresh_per_iteration" || value == "fresh") return MaskMode::FreshPerIteration;
  throw ConfigError("config: mask_mode must be fixed_per_trial or fresh_per_iteration, got: " +
                    value);
}

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + " has an empty key or value");
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "' on line " + std::to_string(lineno));
    kv[key] = value;
  }

  std::set<std::string> used;
  auto take = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("config: missing required key '" + key + "'");
    used.insert(key);
    return it->second;
  };
  auto take_optional = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  ExperimentSpec spec;
  spec.problem.m = parse_size("m", take("m"));
  spec.problem.n = parse_size("n", take("n"));
  spec.problem.seed = parse_u64("seed", take("seed"));
  spec.problem.consistent = parse_bool("consistent", take("consistent"));

  const double p = parse_double("p", take("p"));
  const double q = parse_double("q", take("q"));
  if (!(p > 0.0) || p > 1.0) throw ConfigError("config: p must lie in (0, 1]");
  if (!(q > 0.0) || q > 1.0) throw ConfigError("config: q must lie in (0, 1]");
  spec.rates = ObservationRates(p, q);

  spec.row_block_size = parse_size("ell", take("ell"));
  spec.col_block_size = parse_size("tau", take("tau"));
  spec.trials = parse_size("trials", take("trials"));
  spec.max_iterations = parse_size("iterations", take("iterations"));
  spec.mask_mode = parse_mask_mode(take("mask_mode"));

  if (const std::string* v = take_optional("record_every"))
    spec.record_every = parse_size("record_every", *v);
  if (const std::string* v = take_optional("overlay_bound"))
    spec.overlay_bound = parse_bool("overlay_bound", *v);
  if (const std::string* v = take_optional("rho_samples"))
    spec.rho_samples = parse_size("rho_samples", *v);

  const std::string* alpha = take_optional("alpha");
  std::vector<ScheduleStage> stages;
  for (std::size_t i = 1;; ++i) {
    const std::string key = "stage_" + std::to_string(i);
    const std::string* v = take_optional(key);
    if (!v) break;
    const std::size_t comma = v->find(',');
    if (comma == std::string::npos)
      throw ConfigError("config: key '" + key + "' must look like beta,T");
    ScheduleStage stage;
    stage.step = parse_double(key, trim(v->substr(0, comma)));
    stage.iterations = parse_size(key, trim(v->substr(comma + 1)));
    stages.push_back(stage);
  }
  if (alpha && !stages.empty())
    throw ConfigError("config: give either alpha or stage_i keys, not both");
  if (!alpha && stages.empty())
    throw ConfigError("config: give either alpha or stage_1, stage_2, ...");
  spec.schedule = alpha ? StepSchedule::constant(parse_double("alpha", *alpha))
                        : StepSchedule::piecewise(std::move(stages));

  for (const auto& [key, value] : kv)
    if (!used.count(key)) throw ConfigError("config: unknown key '" + key + "'");

  spec.validate();
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("parse_config_file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "m = " << spec.problem.m << "\n";
  out << "n = " << spec.problem.n << "\n";
  out << "seed = " << spec.problem.seed << "\n";
  out << "consistent = " << (spec.problem.consistent ? "true" : "false") << "\n";
  out << "p = " << fmt_double(spec.rates.p) << "\n";
  out << "q = " << fmt_double(spec.rates.q) << "\n";
  out << "ell = " << spec.row_block_size << "\n";
  out << "tau = " << spec.col_block_size << "\n";
  out << "trials = " << spec.trials << "\n";
  out << "iterations = " << spec.max_iterations << "\n";
  out << "mask_mode = "
      << (spec.mask_mode == MaskMode::FixedPerTrial ? "fixed_per_trial"
                                                    : "fresh_per_iteration")
      << "\n";
  out << "record_every = " << spec.record_every << "\n";
  out << "overlay_bound = " << (spec.overlay_bound ? "true" : "false") << "\n";
  out << "rho_samples = " << spec.rho_samples << "\n";
  if (spec.schedule.is_constant()) {
    out << "alpha = " << fmt_double(spec.schedule.constant_step()) << "\n";
  } else {
    const auto& stages = spec.schedule.stages();
    for (std::size_t i = 0; i < stages.size(); ++i)
      out << "stage_" << (i + 1) << " = " << fmt_double(stages[i].step) << ','
          << stages[i].iterations << "\n";
  }
  return out.str();
}

}  // namespace mlsq
