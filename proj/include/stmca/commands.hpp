#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stmca/config.hpp"

namespace stmca {

struct CommandOptions {
    std::optional<std::uint64_t> seed;     // overrides run.master_seed
    std::optional<std::string> out_dir;    // overrides output.directory
    int threads = 1;
};

// Every written file starts with one volatile header line (creation time,
// wall clock); the rest is a deterministic function of the config and seed.
// CSV files mark it with '#', JSON files keep it in a "header" member on the
// first line.
struct CommandResult {
    std::vector<std::string> files;
};

std::vector<std::string> command_names();

CommandResult cmd_simulate(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_grid(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_moments_dump(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_estimate(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_convergence(const RunConfig& config, const CommandOptions& options);

// Dispatches on the subcommand name; throws ConfigError for unknown names.
CommandResult run_command(const std::string& name, const RunConfig& config, const CommandOptions& options);

// Payload of a written file with its volatile header line removed.
std::string read_payload(const std::string& path);

}  // namespace stmca
