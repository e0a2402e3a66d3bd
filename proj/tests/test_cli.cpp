#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dse/commands.hpp"
#include "dse/csv_io.hpp"
#include "test_helpers.hpp"

using namespace dse;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DSEKIT_BIN) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_short_config(const fs::path& file, const std::string& extra = "") {
  std::ofstream out(file);
  out << R"({
  "scenario": {"duration": 8.0, "fault_start": 3.1},
  "mc": {"trials": 1, "segment_length": 4.0, "modes": ["ekf", "cmsp1"]})"
      << extra << "\n}\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help lists every subcommand") {
  const std::string cmd = std::string(DSEKIT_BIN) + " --help > /tmp/dse_help.txt 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string help = slurp("/tmp/dse_help.txt");
  for (const char* sub : {"simulate", "synth", "estimate", "mc", "compare"})
    CHECK(help.find(sub) != std::string::npos);
  for (const char* flag : {"--config", "--seed", "--out"})
    CHECK(help.find(flag) != std::string::npos);
}

TEST_CASE("unknown flags are hard errors") {
  CHECK(run_cli("simulate --definitely-not-a-flag 2>/dev/null") != 0);
}

TEST_CASE("pipeline: simulate, synth, estimate") {
  TempDir dir("dse_cli_pipeline");
  const fs::path cfg = dir.path / "cfg.json";
  write_short_config(cfg);
  const std::string base = "--config " + cfg.string() + " ";

  REQUIRE(run_cli(base + "simulate --out-file " + (dir.path / "truth.csv").string() +
                  " > /dev/null") == 0);
  REQUIRE(run_cli(base + "synth --truth " + (dir.path / "truth.csv").string() +
                  " --out-file " + (dir.path / "meas.csv").string() +
                  " --seed 5 > /dev/null") == 0);

  SUBCASE("seed repeat reproduces the measurement file byte for byte") {
    REQUIRE(run_cli(base + "synth --truth " + (dir.path / "truth.csv").string() +
                    " --out-file " + (dir.path / "meas2.csv").string() +
                    " --seed 5 > /dev/null") == 0);
    CHECK(slurp(dir.path / "meas.csv") == slurp(dir.path / "meas2.csv"));
  }

  SUBCASE("ekf output equals cmsp with factor zero byte for byte") {
    const std::string common = base + "estimate --measurements " +
                               (dir.path / "meas.csv").string() + " --truth " +
                               (dir.path / "truth.csv").string();
    REQUIRE(run_cli(common + " --mode ekf --out-file " + (dir.path / "e1.csv").string() +
                    " --traces-file " + (dir.path / "t1.csv").string() +
                    " > /dev/null") == 0);
    REQUIRE(run_cli(common + " --mode cmsp --mp 0 --out-file " +
                    (dir.path / "e2.csv").string() + " --traces-file " +
                    (dir.path / "t2.csv").string() + " > /dev/null") == 0);
    CHECK(slurp(dir.path / "e1.csv") == slurp(dir.path / "e2.csv"));
    CHECK(slurp(dir.path / "t1.csv") == slurp(dir.path / "t2.csv"));
  }

  SUBCASE("estimate without a noise source exits with the config code") {
    CHECK(run_cli(base + "estimate --measurements " + (dir.path / "meas.csv").string() +
                  " --mode ekf 2>/dev/null") == kExitConfig);
  }

  SUBCASE("missing measurement column names the column and exits 2") {
    std::ofstream bad(dir.path / "bad.csv");
    bad << "t,e_R,e_I,i_R,i_I,T_m\n0,1,0,0,0,1\n";  // E_fd missing
    bad.close();
    const int code = run_cli(base + "estimate --measurements " +
                             (dir.path / "bad.csv").string() + " --truth " +
                             (dir.path / "truth.csv").string() + " --mode ekf 2> " +
                             (dir.path / "err.txt").string());
    CHECK(code == kExitConfig);
    CHECK(slurp(dir.path / "err.txt").find("E_fd") != std::string::npos);
  }
}

TEST_CASE("zero-noise synthesis reproduces the truth columns") {
  TempDir dir("dse_cli_zeronoise");
  const fs::path cfg = dir.path / "cfg.json";
  std::ofstream out(cfg);
  out << R"({"scenario": {"duration": 2.0, "fault_start": 99.0},
             "synth": {"tve": 0.0, "input_noise": 0.0}})";
  out.close();

  ExperimentConfig config = load_config(cfg);
  cmd_simulate(config, dir.path / "truth.csv");
  cmd_synth(config, dir.path / "truth.csv", dir.path / "meas.csv");

  const TruthTrajectory truth = read_trajectory_csv(dir.path / "truth.csv");
  const MeasurementSeries meas = read_measurements_csv(dir.path / "meas.csv");
  const TruthTrajectory dec = decimate(truth, config.synth.pmu_rate);
  REQUIRE(meas.size() == dec.size());
  for (std::size_t k = 0; k < meas.size(); ++k) {
    CHECK(meas.z_seq[k].to_vector() == dec.measurements[k].to_vector());
    CHECK(meas.u_seq[k].to_vector() == dec.inputs[k].to_vector());
  }
}

TEST_CASE("default scenario configs match the study staging") {
  // lightly damped defaults: 30 s horizon, fault at 10.1 s
  const ExperimentConfig cfg = default_config();
  CHECK(cfg.scenario.duration == 30.0);
  CHECK(cfg.scenario.fault_start == 10.1);
  CHECK(cfg.scenario.dt_sim == 0.001);
  CHECK(cfg.scenario.fault_clear_near == doctest::Approx(0.050));
  CHECK(cfg.scenario.fault_clear_remote == doctest::Approx(0.100));
  CHECK(cfg.synth.pmu_rate == 25.0);
  CHECK(cfg.synth.tve == 0.04);
  CHECK(cfg.synth.input_noise == 0.04);
  CHECK(cfg.estimator.mode.amsp.upper == 0.3);
  CHECK(cfg.estimator.mode.amsp.lower == 0.005);
  CHECK(cfg.estimator.mode.amsp.m_max == 5);
  CHECK(cfg.mc.trials == 100);

  // the well damped preset shipped with the repo: 720 s, fault at 60.1 s
  const fs::path preset = fs::path(PROJECT_SOURCE_DIR) / "configs" / "well_damped.json";
  const ExperimentConfig well = load_config(preset);
  CHECK(well.scenario.duration == 720.0);
  CHECK(well.scenario.fault_start == 60.1);
  CHECK(well.scenario.damping == DampingProfile::well_damped);
  CHECK(well.machine.kd == damping_for_profile(DampingProfile::well_damped));

  const fs::path light = fs::path(PROJECT_SOURCE_DIR) / "configs" / "lightly_damped.json";
  const ExperimentConfig lightly = load_config(light);
  CHECK(lightly.scenario.duration == 30.0);
  CHECK(lightly.scenario.fault_start == 10.1);
}

TEST_CASE("config rejects unknown keys with the config exit code") {
  TempDir dir("dse_cli_badcfg");
  const fs::path cfg = dir.path / "bad.json";
  std::ofstream out(cfg);
  out << R"({"scenario": {"duration": 5.0, "fault_speed": 1.0}})";
  out.close();
  CHECK(run_cli("--config " + cfg.string() + " simulate 2>/dev/null") == kExitConfig);
  CHECK_THROWS_AS(load_config(cfg), ConfigError);
}

TEST_CASE("unstable scenario exits with the instability code") {
  TempDir dir("dse_cli_unstable");
  const fs::path cfg = dir.path / "cfg.json";
  std::ofstream out(cfg);
  out << R"({"scenario": {"duration": 25.0, "fault_start": 5.0, "v_inf": 0.9,
             "x_e_pre": 0.5, "x_e_post": 0.7}})";
  out.close();
  CHECK(run_cli("--config " + cfg.string() + " simulate --out-file " +
                (dir.path / "t.csv").string() + " 2>/dev/null") == kExitInstability);
}

TEST_CASE("mc smoke run emits schema-valid files with the right row counts") {
  TempDir dir("dse_cli_mc");
  const fs::path cfg = dir.path / "cfg.json";
  write_short_config(cfg);
  const ExperimentConfig config = load_config(cfg);
  cmd_mc(config, dir.path / "out", false);

  REQUIRE(fs::exists(dir.path / "out" / "mmse.csv"));
  REQUIRE(fs::exists(dir.path / "out" / "timing.csv"));
  REQUIRE(fs::exists(dir.path / "out" / "mse_curves.csv"));

  std::ifstream in(dir.path / "out" / "mmse.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "mode,state,segment,mMSE");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  // 8 s at 25/s = 201 steps; segments of 4 s: 100+100+1 steps = 3 segments
  CHECK(rows == 2 * 4 * (3 + 1));
}

TEST_CASE("compare renders the table") {
  TempDir dir("dse_cli_compare");
  const fs::path cfg = dir.path / "cfg.json";
  write_short_config(cfg);
  const int code = run_cli("--config " + cfg.string() + " compare --out " +
                           (dir.path / "out").string() + " > " +
                           (dir.path / "table.txt").string());
  REQUIRE(code == 0);
  const std::string table = slurp(dir.path / "table.txt");
  CHECK(table.find("mode") != std::string::npos);
  CHECK(table.find("ekf") != std::string::npos);
  CHECK(table.find("cmsp1") != std::string::npos);
  CHECK(table.find("delta") != std::string::npos);
}

}  // TEST_SUITE
