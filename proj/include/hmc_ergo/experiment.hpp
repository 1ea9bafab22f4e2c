#ifndef HMC_ERGO_EXPERIMENT_HPP
#define HMC_ERGO_EXPERIMENT_HPP

#include <optional>
#include <string>

#include "hmc_ergo/config.hpp"

namespace hmc_ergo {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { sample, diagnose, sweep, dynamic, degenerate_demo };

std::optional<Command> parse_command(const std::string& name);
std::string to_string(Command command);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitAccuracy = 3;

/// Runs one subcommand and writes its outputs under cfg.output_dir:
/// samples.jsonl (one record per transition) and report.csv (one row per
/// probe result; diagnose with several probe kinds writes report.<kind>.csv).
/// Returns the exit code; validation problems are printed to stderr.
int run_experiment(const ExperimentConfig& cfg, Command command);

}  // namespace hmc_ergo

#endif  // HMC_ERGO_EXPERIMENT_HPP
