#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dse/estimator.hpp"
#include "dse/machine_model.hpp"
#include "dse/scenario.hpp"

namespace dse {

/// Measurement synthesis settings. The sample rate must divide the
/// simulation rate evenly; tve is the RMS total vector error fraction
/// applied to phasors, input_noise the multiplicative fraction on the
/// torque and field-voltage inputs.
struct SynthConfig {
  double pmu_rate = 25.0;
  double tve = 0.04;
  double input_noise = 0.04;
  bool noisy_current_inputs = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noisy measurement record at the PMU rate, with the decimated truth
/// retained for error accounting.
struct MeasurementSeries {
  std::vector<double> times;
  std::vector<MeasurementVector> z_seq;
  std::vector<InputVector> u_seq;
  std::vector<StateVector> truth_ref;

  std::size_t size() const { return times.size(); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

/// Keeps every (1/(rate*dt_sim))-th row starting at index 0.
/// Throws ConfigError when the decimation ratio is not an integer.
TruthTrajectory decimate(const TruthTrajectory& traj, double rate);

/// Adds zero-mean Gaussian noise to both phasor components with per-component
/// standard deviation tve*|Z|/sqrt(2), so the RMS total vector error equals
/// tve. Always consumes two draws to keep the stream aligned.
std::pair<double, double> add_phasor_noise(double re, double im, double tve,
                                           std::mt19937_64& rng);

/// Decimates and corrupts a truth trajectory into a PMU-like record.
/// Fully determined by cfg.seed.
MeasurementSeries synthesize(const TruthTrajectory& traj, const SynthConfig& cfg);

/// Squared mode turns the deviation-style expressions into covariances
/// (default); literal keeps them as written on the diagonal.
enum class NoiseScaling { squared, literal };

struct DerivedNoise {
  NoiseModel noise;
  Mat4 p0 = Mat4::Zero();
  bool floored = false;  // some state never moved; its scale was floored
};

/// Noise model from a decimated trajectory: per state the largest one-step
/// change s_i gives Q_ii = (q_fraction*s_i)^2 and P0_ii = (p0_factor*s_i)^2;
/// R is diag(r_sigma^2) independent of the scenario. Scales of constant
/// states are floored at 1e-12.
DerivedNoise derive_noise_model(const TruthTrajectory& decimated,
                                NoiseScaling scaling = NoiseScaling::squared,
                                double q_fraction = 0.04, double r_sigma = 0.04,
                                double p0_factor = 10.0);

}  // namespace dse
