#pragma once

#include <filesystem>
#include <optional>

#include "dse/config.hpp"

namespace dse {

// Subcommand bodies shared between the CLI binary and the test suites.
// They throw dse exceptions; exit_code_for maps them to process codes.

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInstability = 3;
inline constexpr int kExitNumerical = 4;

void cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_file);

void cmd_synth(const ExperimentConfig& cfg, const std::filesystem::path& truth_csv,
               const std::filesystem::path& out_file);

/// Runs one estimator pass over a measurement file. The noise model comes
/// from the config override when present, otherwise it is derived from the
/// decimated truth file. Prints the filter wall time to stdout.
void cmd_estimate(const ExperimentConfig& cfg, const std::filesystem::path& meas_csv,
                  const std::optional<std::filesystem::path>& truth_csv,
                  const std::filesystem::path& estimates_file,
                  const std::filesystem::path& traces_file);

/// Paired Monte-Carlo batch over all configured modes; writes the report,
/// timing and per-step curve CSVs into out_dir. With render_table the
/// mode x state x segment table is printed to stdout.
void cmd_mc(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
            bool render_table);

int exit_code_for(const std::exception& e);

}  // namespace dse
