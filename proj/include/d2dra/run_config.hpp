// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "d2dra/config.hpp"
#include "d2dra/evaluation.hpp"
#include "d2dra/train.hpp"

namespace d2dra {

struct EvalConfig {
    std::vector<Scheme> schemes{Scheme::Oracle, Scheme::Centralized, Scheme::Random};
    std::uint64_t oracle_budget = kDefaultOracleBudget;
    std::size_t timing_samples = 100;

    bool operator==(const EvalConfig&) const = default;
};

/// Sectioned `key = value` run configuration ([system], [train], [eval]).
struct RunConfig {
    SystemConfig system;
    TrainConfig train;
    EvalConfig eval;

    bool operator==(const RunConfig&) const = default;
};

/// Parses the text format; '#' starts a comment. Unknown sections or keys,
/// malformed values, and invariant violations throw ConfigError. The
/// result is finalized and validated.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override.
void apply_override(RunConfig& config, const std::string& assignment);

/// Every key with its current value; parse_run_config(print_run_config(c)) == c.
std::string print_run_config(const RunConfig& config);

/// One line per key: `section.key (default value): description`.
std::string describe_run_config_keys();

}  // namespace d2dra
