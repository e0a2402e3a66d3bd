#include "dse/pmu_synth.hpp"

#include <cmath>

namespace dse {

void SynthConfig::validate() const {
  if (!(pmu_rate > 0.0)) throw ConfigError("synth: pmu_rate must be > 0");
  if (!(tve >= 0.0 && tve < 1.0)) throw ConfigError("synth: tve must be in [0, 1)");
  if (!(input_noise >= 0.0 && input_noise < 1.0))
    throw ConfigError("synth: input_noise must be in [0, 1)");
}

TruthTrajectory decimate(const TruthTrajectory& traj, double rate) {
  if (traj.size() < 2) throw ConfigError("decimate: trajectory too short");
  const double dt_sim = traj.dt();
  const double ratio_f = 1.0 / (rate * dt_sim);
  const long long ratio = std::llround(ratio_f);
  if (ratio < 1 || std::abs(ratio_f - static_cast<double>(ratio)) > 1e-9)
    throw ConfigError("decimate: sample rate does not divide the simulation rate");

  TruthTrajectory out;
  const std::size_t step = static_cast<std::size_t>(ratio);
  for (std::size_t k = 0; k < traj.size(); k += step) {
    out.times.push_back(traj.times[k]);
    out.states.push_back(traj.states[k]);
    out.inputs.push_back(traj.inputs[k]);
    out.measurements.push_back(traj.measurements[k]);
  }
  return out;
}

std::pair<double, double> add_phasor_noise(double re, double im, double tve,
                                           std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sigma = tve * std::hypot(re, im) / std::sqrt(2.0);
  const double n_re = unit(rng);
  const double n_im = unit(rng);
  return {re + sigma * n_re, im + sigma * n_im};
}

MeasurementSeries synthesize(const TruthTrajectory& traj, const SynthConfig& cfg) {
  cfg.validate();
  const TruthTrajectory dec = decimate(traj, cfg.pmu_rate);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  MeasurementSeries series;
  series.times = dec.times;
  series.truth_ref = dec.states;
  series.z_seq.reserve(dec.size());
  series.u_seq.reserve(dec.size());

  for (std::size_t k = 0; k < dec.size(); ++k) {
    const auto [er, ei] =
        add_phasor_noise(dec.measurements[k].er, dec.measurements[k].ei, cfg.tve, rng);
    series.z_seq.push_back({er, ei});

    InputVector u = dec.inputs[k];
    if (cfg.noisy_current_inputs) {
      const auto [ir, ii] = add_phasor_noise(u.ir, u.ii, cfg.tve, rng);
      u.ir = ir;
      u.ii = ii;
    }
    u.efd *= 1.0 + cfg.input_noise * unit(rng);
    u.tm *= 1.0 + cfg.input_noise * unit(rng);
    series.u_seq.push_back(u);
  }
  return series;
}

DerivedNoise derive_noise_model(const TruthTrajectory& decimated, NoiseScaling scaling,
                                double q_fraction, double r_sigma, double p0_factor) {
  if (decimated.size() < 2) throw ConfigError("derive_noise_model: need >= 2 samples");

  Vec4 largest = Vec4::Zero();
  for (std::size_t k = 1; k < decimated.size(); ++k) {
    const Vec4 step = decimated.states[k].to_vector() -
                      decimated.states[k - 1].to_vector();
    largest = largest.cwiseMax(step.cwiseAbs());
  }

  DerivedNoise out;
  for (int i = 0; i < 4; ++i) {
    if (largest[i] < 1e-12) {
      largest[i] = 1e-12;
      out.floored = true;
    }
  }

  out.noise.q = Mat4::Zero();
  out.noise.r = Mat2::Zero();
  out.p0 = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    const double qs = q_fraction * largest[i];
    const double ps = p0_factor * largest[i];
    out.noise.q(i, i) = scaling == NoiseScaling::squared ? qs * qs : qs;
    out.p0(i, i) = scaling == NoiseScaling::squared ? ps * ps : ps;
  }
  const double rs = r_sigma;
  out.noise.r(0, 0) = out.noise.r(1, 1) = rs * rs;
  return out;
}

}  // namespace dse
