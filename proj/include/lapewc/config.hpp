#pragma once

#include "lapewc/serialize.hpp"
#include "lapewc/tasks.hpp"
#include "lapewc/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lapewc {

inline constexpr int kConfigFormatVersion = 1;

struct ExperimentConfig {
    int format_version = kConfigFormatVersion;
    std::vector<TaskSpec> tasks;
    std::vector<Strategy> strategies;
    RunSettings settings;
    std::string output = "reports";
};

/// Parse and validate a config document. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the offending field
/// (e.g. "tasks[1].overlap"); malformed text names the line and column.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Fully populated echo (defaults filled in). parse_config(config_to_json(c).dump())
/// reproduces `c`.
[[nodiscard]] Json config_to_json(const ExperimentConfig& config);

/// Offsets every seed in the config (tasks, base seeds, init, optimizer, Fisher) by `offset`.
void apply_seed_override(ExperimentConfig& config, std::uint64_t offset);

}  // namespace lapewc
