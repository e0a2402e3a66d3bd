// dsekit: dynamic state estimation experiments for a synchronous machine
// driven by PMU-like phasor records.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dse/commands.hpp"

namespace {

struct GlobalArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

dse::ExperimentConfig resolve_config(const GlobalArgs& g) {
  dse::ExperimentConfig cfg =
      g.config_file.empty() ? dse::default_config() : dse::load_config(g.config_file);
  if (g.seed) {
    cfg.synth.seed = *g.seed;
    cfg.mc.base_seed = *g.seed;
  }
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synchronous-machine dynamic state estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_file, "experiment config file (JSON)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override synthesis base seed");
  app.add_option("--out", g.out_dir, "output directory");

  auto* sim = app.add_subcommand("simulate", "generate a ground-truth trajectory CSV");
  std::string sim_out = "truth.csv";
  sim->add_option("--out-file", sim_out, "trajectory CSV path");

  auto* synth = app.add_subcommand("synth", "turn a truth CSV into a noisy PMU record");
  std::string synth_truth, synth_out = "measurements.csv";
  synth->add_option("--truth", synth_truth, "truth trajectory CSV")->required();
  synth->add_option("--out-file", synth_out, "measurement CSV path");

  auto* est = app.add_subcommand("estimate", "run one estimator pass over a record");
  std::string est_meas, est_truth, est_out = "estimates.csv", est_traces = "traces.csv";
  std::string est_mode, est_qmode;
  int est_mp = -1, est_mmax = -1, est_minit = -1;
  double est_upper = -1.0, est_lower = -1.0;
  est->add_option("--measurements", est_meas, "measurement CSV")->required();
  est->add_option("--truth", est_truth, "truth CSV for noise-model derivation");
  est->add_option("--out-file", est_out, "estimates CSV path");
  est->add_option("--traces-file", est_traces, "index/factor trace CSV path");
  est->add_option("--mode", est_mode, "ekf | cmsp | amsp");
  est->add_option("--mp", est_mp, "fixed prediction factor (cmsp)");
  est->add_option("--upper", est_upper, "amsp upper threshold");
  est->add_option("--lower", est_lower, "amsp lower threshold");
  est->add_option("--mmax", est_mmax, "amsp maximum prediction factor");
  est->add_option("--minit", est_minit, "amsp initial prediction factor");
  est->add_option("--q-substep", est_qmode, "paper | scaled");

  auto* mc = app.add_subcommand("mc", "paired Monte-Carlo batch over all modes");
  auto* cmp = app.add_subcommand("compare", "Monte-Carlo batch plus rendered table");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    dse::ExperimentConfig cfg = resolve_config(g);

    if (est->parsed()) {
      auto& e = cfg.estimator;
      if (!est_qmode.empty()) {
        if (est_qmode == "paper")
          e.mode.amsp.q_substep_mode = e.mode.q_substep = dse::QSubstepMode::paper_literal;
        else if (est_qmode == "scaled")
          e.mode.amsp.q_substep_mode = e.mode.q_substep = dse::QSubstepMode::scaled;
        else
          throw dse::ConfigError("--q-substep must be 'paper' or 'scaled'");
      }
      if (est_upper >= 0.0) e.mode.amsp.upper = est_upper;
      if (est_lower >= 0.0) e.mode.amsp.lower = est_lower;
      if (est_mmax >= 0) e.mode.amsp.m_max = est_mmax;
      if (est_minit >= 0) e.mode.amsp.m_init = est_minit;
      if (!est_mode.empty()) {
        if (est_mode == "ekf")
          e.mode = dse::FilterMode::make_ekf(e.mode.q_substep);
        else if (est_mode == "cmsp")
          e.mode = dse::FilterMode::make_cmsp(est_mp < 0 ? 0 : est_mp, e.mode.q_substep);
        else if (est_mode == "amsp")
          e.mode = dse::FilterMode::make_amsp(e.mode.amsp);
        else
          throw dse::ConfigError("--mode must be ekf, cmsp or amsp");
      } else if (est_mp >= 0) {
        e.mode = dse::FilterMode::make_cmsp(est_mp, e.mode.q_substep);
      }
    }

    const auto out_dir = cfg.out_dir;
    if (sim->parsed()) cmd_simulate(cfg, sim_out);
    if (synth->parsed()) cmd_synth(cfg, synth_truth, synth_out);
    if (est->parsed())
      cmd_estimate(cfg, est_meas,
                   est_truth.empty() ? std::nullopt
                                     : std::optional<std::filesystem::path>(est_truth),
                   est_out, est_traces);
    if (mc->parsed()) cmd_mc(cfg, out_dir, false);
    if (cmp->parsed()) cmd_mc(cfg, out_dir, true);
    return dse::kExitOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dse::exit_code_for(e);
  }
}
