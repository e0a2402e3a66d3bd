#include "dse/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace dse {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("config: unknown key '" + section + "." + key + "'");
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

DampingProfile parse_profile(const std::string& s) {
  if (s == "lightly_damped") return DampingProfile::lightly_damped;
  if (s == "well_damped") return DampingProfile::well_damped;
  throw ConfigError("config: unknown damping profile '" + s + "'");
}

QSubstepMode parse_q_mode(const std::string& s) {
  if (s == "paper") return QSubstepMode::paper_literal;
  if (s == "scaled") return QSubstepMode::scaled;
  throw ConfigError("config: q_substep must be 'paper' or 'scaled'");
}

}  // namespace

void ExperimentConfig::validate() const {
  machine.validate();
  scenario.validate();
  synth.validate();
  if (estimator.mode.kind == FilterMode::Kind::amsp) estimator.mode.amsp.validate();
  if (estimator.noise_override) estimator.noise_override->validate();
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.machine.kd = damping_for_profile(cfg.scenario.damping);
  cfg.mc.modes = {FilterMode::make_ekf(), FilterMode::make_amsp(cfg.estimator.mode.amsp),
                  FilterMode::make_cmsp(5)};
  return cfg;
}

FilterMode parse_mode_string(const std::string& name, const EstimatorConfig& est) {
  if (name == "ekf") return FilterMode::make_ekf(est.mode.q_substep);
  if (name == "amsp") return FilterMode::make_amsp(est.mode.amsp);
  if (name.rfind("cmsp", 0) == 0) {
    const std::string digits = name.substr(4);
    if (digits.empty()) throw ConfigError("config: cmsp mode needs a factor, e.g. cmsp5");
    std::size_t pos = 0;
    const int m = std::stoi(digits, &pos);
    if (pos != digits.size() || m < 0)
      throw ConfigError("config: bad cmsp factor in '" + name + "'");
    return FilterMode::make_cmsp(m, est.mode.q_substep);
  }
  throw ConfigError("config: unknown estimator mode '" + name + "'");
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  ExperimentConfig cfg;
  reject_unknown(root, "",
                 {"machine", "scenario", "synth", "estimator", "mc", "paths"});

  bool explicit_kd = false;
  if (root.contains("machine")) {
    const json& m = root["machine"];
    reject_unknown(m, "machine",
                   {"h", "kd", "f0", "xd", "xq", "xd_t", "xq_t", "td0_t", "tq0_t"});
    read_if(m, "h", cfg.machine.h);
    if (m.contains("kd")) {
      cfg.machine.kd = m.at("kd").get<double>();
      explicit_kd = true;
    }
    if (m.contains("f0"))
      cfg.machine.omega0 = 2.0 * 3.14159265358979323846 * m.at("f0").get<double>();
    read_if(m, "xd", cfg.machine.xd);
    read_if(m, "xq", cfg.machine.xq);
    read_if(m, "xd_t", cfg.machine.xd_t);
    read_if(m, "xq_t", cfg.machine.xq_t);
    read_if(m, "td0_t", cfg.machine.td0_t);
    read_if(m, "tq0_t", cfg.machine.tq0_t);
  }

  if (root.contains("scenario")) {
    const json& s = root["scenario"];
    reject_unknown(s, "scenario",
                   {"duration", "dt_sim", "fault_start", "fault_clear_near",
                    "fault_clear_remote", "v_inf", "x_e_pre", "x_e_fault", "x_e_post",
                    "p_active", "v_terminal", "damping"});
    read_if(s, "duration", cfg.scenario.duration);
    read_if(s, "dt_sim", cfg.scenario.dt_sim);
    read_if(s, "fault_start", cfg.scenario.fault_start);
    read_if(s, "fault_clear_near", cfg.scenario.fault_clear_near);
    read_if(s, "fault_clear_remote", cfg.scenario.fault_clear_remote);
    read_if(s, "v_inf", cfg.scenario.v_inf);
    read_if(s, "x_e_pre", cfg.scenario.x_e_pre);
    read_if(s, "x_e_fault", cfg.scenario.x_e_fault);
    read_if(s, "x_e_post", cfg.scenario.x_e_post);
    read_if(s, "p_active", cfg.scenario.op.p_active);
    read_if(s, "v_terminal", cfg.scenario.op.v_terminal);
    if (s.contains("damping"))
      cfg.scenario.damping = parse_profile(s.at("damping").get<std::string>());
  }
  if (!explicit_kd) cfg.machine.kd = damping_for_profile(cfg.scenario.damping);

  if (root.contains("synth")) {
    const json& s = root["synth"];
    reject_unknown(s, "synth",
                   {"pmu_rate", "tve", "input_noise", "noisy_current_inputs", "seed"});
    read_if(s, "pmu_rate", cfg.synth.pmu_rate);
    read_if(s, "tve", cfg.synth.tve);
    read_if(s, "input_noise", cfg.synth.input_noise);
    read_if(s, "noisy_current_inputs", cfg.synth.noisy_current_inputs);
    read_if(s, "seed", cfg.synth.seed);
  }

  if (root.contains("estimator")) {
    const json& e = root["estimator"];
    reject_unknown(e, "estimator",
                   {"mode", "mp", "upper", "lower", "m_max", "m_init", "q_substep",
                    "integrator", "jacobian", "noise_scaling", "q_diag", "r_diag",
                    "p0_diag"});
    AmspConfig amsp;
    read_if(e, "upper", amsp.upper);
    read_if(e, "lower", amsp.lower);
    read_if(e, "m_max", amsp.m_max);
    read_if(e, "m_init", amsp.m_init);
    QSubstepMode q_mode = QSubstepMode::paper_literal;
    if (e.contains("q_substep")) q_mode = parse_q_mode(e.at("q_substep").get<std::string>());
    amsp.q_substep_mode = q_mode;

    std::string mode_name = "ekf";
    read_if(e, "mode", mode_name);
    int mp = 0;
    read_if(e, "mp", mp);
    if (mode_name == "ekf") {
      cfg.estimator.mode = FilterMode::make_ekf(q_mode);
    } else if (mode_name == "cmsp") {
      cfg.estimator.mode = FilterMode::make_cmsp(mp, q_mode);
    } else if (mode_name == "amsp") {
      cfg.estimator.mode = FilterMode::make_amsp(amsp);
    } else {
      cfg.estimator.mode = parse_mode_string(mode_name, cfg.estimator);
      cfg.estimator.mode.q_substep = q_mode;
      cfg.estimator.mode.amsp = amsp;
    }
    cfg.estimator.mode.amsp = amsp;

    if (e.contains("integrator")) {
      const std::string s = e.at("integrator").get<std::string>();
      if (s == "euler")
        cfg.estimator.options.scheme = IntegrationScheme::euler;
      else if (s == "modified_euler")
        cfg.estimator.options.scheme = IntegrationScheme::modified_euler;
      else
        throw ConfigError("config: integrator must be 'euler' or 'modified_euler'");
    }
    if (e.contains("jacobian")) {
      const std::string s = e.at("jacobian").get<std::string>();
      if (s == "analytic")
        cfg.estimator.options.jacobian = JacobianMode::analytic;
      else if (s == "finite_difference")
        cfg.estimator.options.jacobian = JacobianMode::finite_difference;
      else
        throw ConfigError("config: jacobian must be 'analytic' or 'finite_difference'");
    }
    if (e.contains("noise_scaling")) {
      const std::string s = e.at("noise_scaling").get<std::string>();
      if (s == "squared")
        cfg.estimator.noise_scaling = NoiseScaling::squared;
      else if (s == "literal")
        cfg.estimator.noise_scaling = NoiseScaling::literal;
      else
        throw ConfigError("config: noise_scaling must be 'squared' or 'literal'");
    }

    const bool has_q = e.contains("q_diag"), has_r = e.contains("r_diag");
    if (has_q != has_r)
      throw ConfigError("config: q_diag and r_diag must be given together");
    if (has_q) {
      const auto qv = e.at("q_diag").get<std::vector<double>>();
      const auto rv = e.at("r_diag").get<std::vector<double>>();
      if (qv.size() != 4 || rv.size() != 2)
        throw ConfigError("config: q_diag needs 4 entries, r_diag needs 2");
      NoiseModel nm;
      nm.q = Mat4::Zero();
      nm.r = Mat2::Zero();
      for (int i = 0; i < 4; ++i) nm.q(i, i) = qv[i];
      for (int i = 0; i < 2; ++i) nm.r(i, i) = rv[i];
      cfg.estimator.noise_override = nm;
    }
    if (e.contains("p0_diag")) {
      const auto pv = e.at("p0_diag").get<std::vector<double>>();
      if (pv.size() != 4) throw ConfigError("config: p0_diag needs 4 entries");
      Mat4 p0 = Mat4::Zero();
      for (int i = 0; i < 4; ++i) p0(i, i) = pv[i];
      cfg.estimator.p0_override = p0;
    }
  }

  if (root.contains("mc")) {
    const json& m = root["mc"];
    reject_unknown(m, "mc", {"trials", "base_seed", "segment_length", "modes"});
    read_if(m, "trials", cfg.mc.trials);
    read_if(m, "base_seed", cfg.mc.base_seed);
    read_if(m, "segment_length", cfg.mc.segment_length);
    if (m.contains("modes")) {
      cfg.mc.modes.clear();
      for (const auto& name : m.at("modes").get<std::vector<std::string>>())
        cfg.mc.modes.push_back(parse_mode_string(name, cfg.estimator));
    }
  }
  if (cfg.mc.modes.empty())
    cfg.mc.modes = {FilterMode::make_ekf(cfg.estimator.mode.q_substep),
                    FilterMode::make_amsp(cfg.estimator.mode.amsp),
                    FilterMode::make_cmsp(5, cfg.estimator.mode.q_substep)};

  if (root.contains("paths")) {
    const json& p = root["paths"];
    reject_unknown(p, "paths", {"out_dir"});
    if (p.contains("out_dir")) cfg.out_dir = p.at("out_dir").get<std::string>();
  }

  cfg.validate();
  return cfg;
}

}  // namespace dse
