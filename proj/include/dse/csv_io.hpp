#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dse/estimator.hpp"
#include "dse/machine_model.hpp"

namespace dse {

struct TruthTrajectory;
struct MeasurementSeries;

/// Shortest round-trip decimal form of a double (deterministic output).
std::string format_double(double v);

// Trajectory files: t,delta,domega,eq_p,ed_p,T_m,E_fd,i_R,i_I,e_R,e_I
void write_trajectory_csv(const TruthTrajectory& traj, const std::filesystem::path& file);
TruthTrajectory read_trajectory_csv(const std::filesystem::path& file);

// Measurement files: t,e_R,e_I,i_R,i_I,T_m,E_fd
void write_measurements_csv(const MeasurementSeries& series,
                            const std::filesystem::path& file);
/// Reads a measurement series; truth columns are not part of this schema.
MeasurementSeries read_measurements_csv(const std::filesystem::path& file);

// Estimator outputs.
void write_estimates_csv(const FilterRun& run, double t0, double dt,
                         const std::filesystem::path& file);
void write_traces_csv(const FilterRun& run, double t0, double dt,
                      const std::filesystem::path& file);

}  // namespace dse
