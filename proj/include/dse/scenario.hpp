#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "dse/machine_model.hpp"

namespace dse {

enum class DampingProfile { lightly_damped, well_damped };

/// Damping factor emulating stabilizer-off / stabilizer-on behavior.
double damping_for_profile(DampingProfile profile);

struct OperatingPoint {
  double p_active = 0.9;    // delivered active power (pu)
  double v_terminal = 1.0;  // terminal voltage magnitude (pu)
};

/// Single-machine infinite-bus scenario: a staged three-phase fault on the
/// external network. During the fault the source is shunted (seen as zero
/// voltage behind x_e_fault); near-end clearing restores the source through
/// the weakened series path x_e_fault + x_e_post; remote clearing leaves the
/// post-fault reactance x_e_post.
struct ScenarioConfig {
  double duration = 30.0;
  double dt_sim = 0.001;
  double fault_start = 10.1;         // >= duration disables the fault
  double fault_clear_near = 0.050;   // s after fault_start
  double fault_clear_remote = 0.100; // s after fault_start
  double v_inf = 0.95;
  double x_e_pre = 0.4;
  double x_e_fault = 0.05;
  double x_e_post = 0.55;
  OperatingPoint op{};
  DampingProfile damping = DampingProfile::lightly_damped;

  void validate() const;

  /// Effective (source voltage, external reactance) at time t.
  std::pair<double, double> network_at(double t) const;
};

/// Noise-free ground truth on the simulation grid.
struct TruthTrajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<InputVector> inputs;
  std::vector<MeasurementVector> measurements;

  std::size_t size() const { return times.size(); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Terminal currents and the consistent terminal voltage for a machine
/// state tied to a source v_src behind reactance x_e. Solves the 2x2
/// linear system obtained from the machine voltage relation (linear in
/// the currents) and the line relation e = v_src + j x_e i.
struct NetworkSolution {
  double ir = 0.0;
  double ii = 0.0;
  MeasurementVector e{};
};

NetworkSolution solve_stator_network(const StateVector& x, double v_src, double x_e,
                                     const MachineParams& p);

/// Equilibrium state and inputs delivering the requested operating point
/// into the infinite bus. Throws ConfigError when the power transfer is
/// infeasible for the given voltages and reactance.
std::pair<StateVector, InputVector> steady_state_init(const OperatingPoint& op,
                                                      double v_inf, double x_e,
                                                      const MachineParams& p);

/// Integrates the machine through the staged fault with fixed-step RK4,
/// recomputing the network currents at every stage evaluation. Mechanical
/// torque and field voltage are held at their equilibrium values.
/// Throws InstabilityError when |domega| exceeds 0.5 pu.
TruthTrajectory simulate(const ScenarioConfig& cfg, const MachineParams& p);

/// Reads and validates an externally produced trajectory (uniform time
/// grid, finite values). Schema errors carry the offending row or column.
TruthTrajectory ingest_trajectory(const std::filesystem::path& file);

void export_trajectory(const TruthTrajectory& traj, const std::filesystem::path& file);

}  // namespace dse
