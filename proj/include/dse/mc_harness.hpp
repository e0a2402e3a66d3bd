#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dse/estimator.hpp"
#include "dse/pmu_synth.hpp"
#include "dse/scenario.hpp"

namespace dse {

struct McConfig {
  int trials = 100;
  std::uint64_t base_seed = 0;
  double segment_length = 10.0;  // seconds
  std::vector<FilterMode> modes;

  void validate() const;
};

/// Per-mode Monte-Carlo summary. Segment boundaries are aligned to
/// measurement steps; a partial trailing segment keeps its actual length.
struct ModeReport {
  std::string label;
  Vec4 whole_mmse = Vec4::Zero();
  std::vector<Vec4> segment_mmse;
  std::vector<int> segment_steps;
  std::vector<Vec4> mse_curve;  // per measurement step
  double time_mean_s = 0.0;
  double time_min_s = 0.0;
  double time_max_s = 0.0;
  double time_total_s = 0.0;
};

struct McReport {
  std::vector<ModeReport> modes;
  std::vector<double> times;  // measurement time stamps
  double dt = 0.0;
};

std::string mode_label(const FilterMode& mode);

/// Mean squared error across trials at one time step, per state.
Vec4 mse_at_step(const std::vector<StateVector>& estimates, const StateVector& truth);

/// Arithmetic mean of per-step MSE over [begin, end). Throws on empty range.
Vec4 mmse(const std::vector<Vec4>& mse_curve, std::size_t begin, std::size_t end);

/// Simulates the scenario once, then runs every mode on identical noisy
/// series per trial (seed_n = base_seed xor n). Trials execute sequentially
/// so wall-time comparisons stay uncontended. The noise model and initial
/// covariance are derived from the decimated truth unless overridden.
McReport run_mc(const ScenarioConfig& scenario, const MachineParams& machine,
                const SynthConfig& synth, const McConfig& mc,
                const FilterOptions& opts = {},
                const std::optional<NoiseModel>& noise_override = std::nullopt,
                const std::optional<Mat4>& p0_override = std::nullopt);

void write_report_csv(const McReport& report, const std::filesystem::path& file);
void write_timing_csv(const McReport& report, const std::filesystem::path& file);
void write_curves_csv(const McReport& report, const std::filesystem::path& file);

}  // namespace dse
