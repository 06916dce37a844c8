#pragma once

#include <string>
#include <string_view>

#include "bilicut/suite.hpp"

namespace bilicut {

/// Everything the command-line harness can set from a config file.
struct HarnessConfig {
  ExperimentConfig experiment;
  std::string backend = "ipm";
};

/// Applies one key=value setting. Keys:
///   seed, dims (20x4,20x8,...), densities, rank_fractions, methods, jobs,
///   ub_starts, zero_quadratic, cut_max_n (0 = no limit), max_n_cuts,
///   max_cuts_per_round, violation_threshold, time_limit, solver.backend.
/// Throws kInvalidParams on unknown keys or malformed values.
void apply_setting(HarnessConfig& config, std::string_view key, std::string_view value);

/// Parses a TOML-style file body: one key = value per line, '#' comments,
/// optional [section] headers that prefix keys ("[solver]" + "backend").
/// Quotes around values are stripped.
HarnessConfig parse_config(std::string_view text, HarnessConfig base = {});

/// Replaces the seed with $BILICUT_SEED when it is set. Throws kInvalidParams
/// when the variable is not an unsigned integer.
void apply_seed_env(HarnessConfig& config);

}  // namespace bilicut
