#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dse/estimator.hpp"
#include "dse/mc_harness.hpp"
#include "dse/pmu_synth.hpp"
#include "dse/scenario.hpp"

namespace dse {

struct EstimatorConfig {
  FilterMode mode = FilterMode::make_ekf();
  FilterOptions options{};
  NoiseScaling noise_scaling = NoiseScaling::squared;
  std::optional<NoiseModel> noise_override;
  std::optional<Mat4> p0_override;
};

/// One experiment: machine + scenario + synthesis + estimator + batch
/// settings. The damping profile supplies the machine damping factor
/// unless the config sets machine.kd explicitly.
struct ExperimentConfig {
  MachineParams machine{};
  ScenarioConfig scenario{};
  SynthConfig synth{};
  EstimatorConfig estimator{};
  McConfig mc{};
  std::filesystem::path out_dir = "out";

  void validate() const;
};

ExperimentConfig default_config();

/// Strict parse: unknown keys anywhere are rejected.
ExperimentConfig load_config(const std::filesystem::path& file);

FilterMode parse_mode_string(const std::string& name, const EstimatorConfig& est);

}  // namespace dse
