#include "dse/commands.hpp"

#include <cstdio>
#include <filesystem>

#include "dse/csv_io.hpp"

namespace dse {

namespace fs = std::filesystem;

void cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_file) {
  const TruthTrajectory traj = simulate(cfg.scenario, cfg.machine);
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  export_trajectory(traj, out_file);
  std::printf("wrote %zu rows to %s\n", traj.size(), out_file.string().c_str());
}

void cmd_synth(const ExperimentConfig& cfg, const fs::path& truth_csv,
               const fs::path& out_file) {
  const TruthTrajectory traj = ingest_trajectory(truth_csv);
  const MeasurementSeries series = synthesize(traj, cfg.synth);
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  write_measurements_csv(series, out_file);
  std::printf("wrote %zu samples to %s\n", series.size(), out_file.string().c_str());
}

namespace {

std::pair<NoiseModel, Mat4> resolve_noise(const ExperimentConfig& cfg,
                                          const std::optional<fs::path>& truth_csv) {
  if (cfg.estimator.noise_override && cfg.estimator.p0_override)
    return {*cfg.estimator.noise_override, *cfg.estimator.p0_override};
  if (!truth_csv)
    throw ConfigError("estimate: need either q_diag/r_diag/p0_diag in the config or "
                      "a --truth file to derive the noise model from");
  const TruthTrajectory truth = ingest_trajectory(*truth_csv);
  const TruthTrajectory dec = decimate(truth, cfg.synth.pmu_rate);
  const DerivedNoise derived = derive_noise_model(dec, cfg.estimator.noise_scaling);
  return {cfg.estimator.noise_override.value_or(derived.noise),
          cfg.estimator.p0_override.value_or(derived.p0)};
}

}  // namespace

void cmd_estimate(const ExperimentConfig& cfg, const fs::path& meas_csv,
                  const std::optional<fs::path>& truth_csv,
                  const fs::path& estimates_file, const fs::path& traces_file) {
  const MeasurementSeries series = read_measurements_csv(meas_csv);
  if (series.size() < 2) throw ConfigError("estimate: need at least two samples");
  const auto [noise, p0] = resolve_noise(cfg, truth_csv);

  const double dt = series.dt();
  const FilterRun run = run_filter(series.z_seq, series.u_seq, cfg.machine, noise, p0,
                                   cfg.estimator.mode, dt, cfg.estimator.options);

  if (estimates_file.has_parent_path())
    fs::create_directories(estimates_file.parent_path());
  if (traces_file.has_parent_path()) fs::create_directories(traces_file.parent_path());
  write_estimates_csv(run, series.times.front(), dt, estimates_file);
  write_traces_csv(run, series.times.front(), dt, traces_file);
  std::printf("filter wall time: %s s (%zu steps, mode %s)\n",
              format_double(run.wall_time_s).c_str(), run.estimates.size(),
              mode_label(cfg.estimator.mode).c_str());
}

void cmd_mc(const ExperimentConfig& cfg, const fs::path& out_dir, bool render_table) {
  const McReport report = run_mc(cfg.scenario, cfg.machine, cfg.synth, cfg.mc,
                                 cfg.estimator.options, cfg.estimator.noise_override,
                                 cfg.estimator.p0_override);
  fs::create_directories(out_dir);
  write_report_csv(report, out_dir / "mmse.csv");
  write_timing_csv(report, out_dir / "timing.csv");
  write_curves_csv(report, out_dir / "mse_curves.csv");

  if (render_table) {
    const char* states[4] = {"delta", "domega", "eq_p", "ed_p"};
    std::printf("%-8s %-8s %-10s", "mode", "state", "whole");
    const std::size_t segs = report.modes.front().segment_mmse.size();
    for (std::size_t s = 0; s < segs; ++s) std::printf(" seg%-7zu", s + 1);
    std::printf("\n");
    for (const auto& mode : report.modes)
      for (int s = 0; s < 4; ++s) {
        std::printf("%-8s %-8s %-10.3e", mode.label.c_str(), states[s],
                    mode.whole_mmse[s]);
        for (const auto& seg : mode.segment_mmse) std::printf(" %-10.3e", seg[s]);
        std::printf("\n");
      }
    for (const auto& mode : report.modes)
      std::printf("time %-8s mean=%.4e min=%.4e max=%.4e s\n", mode.label.c_str(),
                  mode.time_mean_s, mode.time_min_s, mode.time_max_s);
  }
  std::printf("wrote mmse.csv, timing.csv, mse_curves.csv to %s\n",
              out_dir.string().c_str());
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InstabilityError*>(&e)) return kExitInstability;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return 1;
}

}  // namespace dse
