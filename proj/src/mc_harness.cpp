#include "dse/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "dse/csv_io.hpp"

namespace dse {

void McConfig::validate() const {
  if (trials < 1) throw ConfigError("mc: trials must be >= 1");
  if (!(segment_length > 0.0)) throw ConfigError("mc: segment_length must be > 0");
  if (modes.empty()) throw ConfigError("mc: at least one estimator mode required");
}

std::string mode_label(const FilterMode& mode) {
  switch (mode.kind) {
    case FilterMode::Kind::ekf: return "ekf";
    case FilterMode::Kind::cmsp: return "cmsp" + std::to_string(mode.m_fixed);
    case FilterMode::Kind::amsp: return "amsp";
  }
  return "?";
}

Vec4 mse_at_step(const std::vector<StateVector>& estimates, const StateVector& truth) {
  if (estimates.empty()) throw ConfigError("mse_at_step: no estimates");
  Vec4 acc = Vec4::Zero();
  const Vec4 t = truth.to_vector();
  for (const auto& e : estimates) {
    const Vec4 d = e.to_vector() - t;
    acc += d.cwiseProduct(d);
  }
  return acc / static_cast<double>(estimates.size());
}

Vec4 mmse(const std::vector<Vec4>& mse_curve, std::size_t begin, std::size_t end) {
  if (begin >= end || end > mse_curve.size())
    throw ConfigError("mmse: empty or out-of-range step interval");
  Vec4 acc = Vec4::Zero();
  for (std::size_t k = begin; k < end; ++k) acc += mse_curve[k];
  return acc / static_cast<double>(end - begin);
}

McReport run_mc(const ScenarioConfig& scenario, const MachineParams& machine,
                const SynthConfig& synth, const McConfig& mc, const FilterOptions& opts,
                const std::optional<NoiseModel>& noise_override,
                const std::optional<Mat4>& p0_override) {
  mc.validate();
  const TruthTrajectory truth = simulate(scenario, machine);
  const TruthTrajectory dec = decimate(truth, synth.pmu_rate);
  const DerivedNoise derived = derive_noise_model(dec);
  const NoiseModel noise = noise_override.value_or(derived.noise);
  const Mat4 p0 = p0_override.value_or(derived.p0);

  const std::size_t steps = dec.size();
  const double dt = dec.dt();

  McReport report;
  report.times = dec.times;
  report.dt = dt;
  report.modes.resize(mc.modes.size());

  std::vector<std::vector<Vec4>> sq_sum(
      mc.modes.size(), std::vector<Vec4>(steps, Vec4::Zero()));
  for (std::size_t m = 0; m < mc.modes.size(); ++m) {
    auto& r = report.modes[m];
    r.label = mode_label(mc.modes[m]);
    r.time_min_s = std::numeric_limits<double>::infinity();
  }

  for (int n = 0; n < mc.trials; ++n) {
    SynthConfig trial_synth = synth;
    trial_synth.seed = mc.base_seed ^ static_cast<std::uint64_t>(n);
    const MeasurementSeries series = synthesize(truth, trial_synth);

    for (std::size_t m = 0; m < mc.modes.size(); ++m) {
      FilterRun run;
      try {
        run = run_filter(series.z_seq, series.u_seq, machine, noise, p0, mc.modes[m],
                         dt, opts);
      } catch (const std::exception& e) {
        throw NumericalError("trial " + std::to_string(n) + ", mode " +
                             report.modes[m].label + ": " + e.what());
      }
      for (std::size_t k = 0; k < steps; ++k) {
        const Vec4 d = run.estimates[k].mean - series.truth_ref[k].to_vector();
        sq_sum[m][k] += d.cwiseProduct(d);
      }
      auto& r = report.modes[m];
      r.time_total_s += run.wall_time_s;
      r.time_min_s = std::min(r.time_min_s, run.wall_time_s);
      r.time_max_s = std::max(r.time_max_s, run.wall_time_s);
    }
  }

  const int steps_per_segment =
      std::max(1, static_cast<int>(std::llround(mc.segment_length / dt)));
  for (std::size_t m = 0; m < mc.modes.size(); ++m) {
    auto& r = report.modes[m];
    r.mse_curve.resize(steps);
    for (std::size_t k = 0; k < steps; ++k)
      r.mse_curve[k] = sq_sum[m][k] / static_cast<double>(mc.trials);
    r.whole_mmse = mmse(r.mse_curve, 0, steps);
    for (std::size_t begin = 0; begin < steps;
         begin += static_cast<std::size_t>(steps_per_segment)) {
      const std::size_t end =
          std::min(steps, begin + static_cast<std::size_t>(steps_per_segment));
      r.segment_mmse.push_back(mmse(r.mse_curve, begin, end));
      r.segment_steps.push_back(static_cast<int>(end - begin));
    }
    r.time_mean_s = r.time_total_s / mc.trials;
  }
  return report;
}

namespace {

const char* kStateNames[4] = {"delta", "domega", "eq_p", "ed_p"};

}  // namespace

void write_report_csv(const McReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write file: " + file.string());
  out << "mode,state,segment,mMSE\n";
  for (const auto& mode : report.modes) {
    for (int s = 0; s < 4; ++s) {
      out << mode.label << ',' << kStateNames[s] << ",whole,"
          << format_double(mode.whole_mmse[s]) << '\n';
      for (std::size_t seg = 0; seg < mode.segment_mmse.size(); ++seg)
        out << mode.label << ',' << kStateNames[s] << ",seg" << (seg + 1) << ','
            << format_double(mode.segment_mmse[seg][s]) << '\n';
    }
  }
}

void write_timing_csv(const McReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write file: " + file.string());
  out << "mode,mean_s,min_s,max_s\n";
  for (const auto& mode : report.modes)
    out << mode.label << ',' << format_double(mode.time_mean_s) << ','
        << format_double(mode.time_min_s) << ',' << format_double(mode.time_max_s)
        << '\n';
}

void write_curves_csv(const McReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write file: " + file.string());
  out << "mode,t,mse_delta,mse_domega,mse_eq_p,mse_ed_p\n";
  for (const auto& mode : report.modes)
    for (std::size_t k = 0; k < mode.mse_curve.size(); ++k) {
      out << mode.label << ',' << format_double(report.times[k]);
      for (int s = 0; s < 4; ++s) out << ',' << format_double(mode.mse_curve[k][s]);
      out << '\n';
    }
}

}  // namespace dse
