#include <doctest.h>

#include <cmath>
#include <random>

#include "dse/pmu_synth.hpp"
#include "test_helpers.hpp"

using namespace dse;
using dse::testing::cached_lightly_damped_truth;
using dse::testing::steady_scenario;
using dse::testing::test_machine;

TEST_SUITE("pmu_synth") {

TEST_CASE("decimate") {
  const TruthTrajectory& truth = cached_lightly_damped_truth();

  SUBCASE("25 samples/s on a 1 ms grid keeps every 40th row") {
    const TruthTrajectory dec = decimate(truth, 25.0);
    CHECK(dec.times[1] == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(dec.size() == (truth.size() - 1) / 40 + 1);
    CHECK(dec.states[1].to_vector() == truth.states[40].to_vector());
  }

  SUBCASE("full rate is the identity") {
    const TruthTrajectory dec = decimate(truth, 1.0 / truth.dt());
    REQUIRE(dec.size() == truth.size());
    for (std::size_t k = 0; k < dec.size(); k += 997)
      CHECK(dec.states[k].to_vector() == truth.states[k].to_vector());
  }

  SUBCASE("non-integral ratios are rejected") {
    CHECK_THROWS_AS(decimate(truth, 30.0), ConfigError);
  }
}

TEST_CASE("add_phasor_noise") {
  SUBCASE("zero tve is exact") {
    std::mt19937_64 rng(501);
    const auto [re, im] = add_phasor_noise(0.9, -0.4, 0.0, rng);
    CHECK(re == 0.9);
    CHECK(im == -0.4);
  }

  SUBCASE("zero magnitude carries no noise") {
    std::mt19937_64 rng(502);
    const auto [re, im] = add_phasor_noise(0.0, 0.0, 0.04, rng);
    CHECK(re == 0.0);
    CHECK(im == 0.0);
  }

  SUBCASE("empirical RMS total vector error matches the setting") {
    std::mt19937_64 rng(503);
    const double tve = 0.04;
    const double re0 = 0.8, im0 = 0.6;  // |Z| = 1
    double acc = 0.0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const auto [re, im] = add_phasor_noise(re0, im0, tve, rng);
      acc += (re - re0) * (re - re0) + (im - im0) * (im - im0);
    }
    const double rms_tve = std::sqrt(acc / n);
    CHECK(rms_tve == doctest::Approx(tve).epsilon(0.02));
  }

  SUBCASE("per-component deviation scales linearly with magnitude") {
    const double tve = 0.04;
    const double expected_slope = tve / std::sqrt(2.0);
    for (const double mag : {0.1, 0.5, 1.0, 1.5}) {
      std::mt19937_64 rng(504);
      double acc = 0.0;
      const int n = 20000;
      for (int k = 0; k < n; ++k) {
        const auto [re, im] = add_phasor_noise(mag, 0.0, tve, rng);
        acc += (re - mag) * (re - mag);
      }
      const double sigma = std::sqrt(acc / n);
      CHECK(sigma / mag == doctest::Approx(expected_slope).epsilon(0.05));
    }
  }
}

TEST_CASE("synthesize") {
  const TruthTrajectory& truth = cached_lightly_damped_truth();

  SUBCASE("seeded determinism") {
    SynthConfig cfg;
    cfg.seed = 42;
    const MeasurementSeries a = synthesize(truth, cfg);
    const MeasurementSeries b = synthesize(truth, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a.z_seq[k].to_vector() == b.z_seq[k].to_vector());
      CHECK(a.u_seq[k].to_vector() == b.u_seq[k].to_vector());
    }
  }

  SUBCASE("zero noise reproduces the decimated truth") {
    SynthConfig cfg;
    cfg.tve = 0.0;
    cfg.input_noise = 0.0;
    const MeasurementSeries s = synthesize(truth, cfg);
    const TruthTrajectory dec = decimate(truth, cfg.pmu_rate);
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(s.z_seq[k].to_vector() == dec.measurements[k].to_vector());
      CHECK(s.u_seq[k].to_vector() == dec.inputs[k].to_vector());
    }
  }

  SUBCASE("distinct seeds give almost everywhere different samples") {
    SynthConfig a, b;
    a.seed = 1;
    b.seed = 2;
    const MeasurementSeries sa = synthesize(truth, a);
    const MeasurementSeries sb = synthesize(truth, b);
    std::size_t differing = 0;
    for (std::size_t k = 0; k < sa.size(); ++k)
      if (sa.z_seq[k].er != sb.z_seq[k].er) ++differing;
    CHECK(static_cast<double>(differing) / sa.size() > 0.99);
  }
}

TEST_CASE("derive_noise_model") {
  SUBCASE("follows the four-percent-of-largest-change rule") {
    TruthTrajectory traj;
    for (int k = 0; k < 11; ++k) {
      traj.times.push_back(0.04 * k);
      traj.states.push_back({0.01 * k, 0.0, 1.0, 0.5});  // delta walks, rest constant
      traj.inputs.push_back({});
      traj.measurements.push_back({});
    }
    const DerivedNoise d = derive_noise_model(traj);
    CHECK(d.noise.q(0, 0) == doctest::Approx(1.6e-7).epsilon(1e-12));
    CHECK(d.floored);  // the constant states were floored
    CHECK(d.noise.q(1, 1) > 0.0);
    CHECK(d.p0(0, 0) / d.noise.q(0, 0) == doctest::Approx(62500.0).epsilon(1e-9));
  }

  SUBCASE("R is scenario independent") {
    const TruthTrajectory dec = decimate(cached_lightly_damped_truth(), 25.0);
    const DerivedNoise d = derive_noise_model(dec);
    CHECK(d.noise.r(0, 0) == doctest::Approx(0.0016).epsilon(1e-12));
    CHECK(d.noise.r(1, 1) == doctest::Approx(0.0016).epsilon(1e-12));
    CHECK(d.noise.r(0, 1) == 0.0);
    CHECK_FALSE(d.floored);
    for (int i = 0; i < 4; ++i) {
      CHECK(d.noise.q(i, i) > 0.0);
      CHECK(d.p0(i, i) / d.noise.q(i, i) == doctest::Approx(62500.0).epsilon(1e-9));
    }
  }

  SUBCASE("literal scaling keeps the expressions unsquared") {
    const TruthTrajectory dec = decimate(cached_lightly_damped_truth(), 25.0);
    const DerivedNoise sq = derive_noise_model(dec, NoiseScaling::squared);
    const DerivedNoise lit = derive_noise_model(dec, NoiseScaling::literal);
    for (int i = 0; i < 4; ++i) {
      CHECK(lit.noise.q(i, i) == doctest::Approx(std::sqrt(sq.noise.q(i, i))).epsilon(1e-12));
      CHECK(lit.p0(i, i) == doctest::Approx(std::sqrt(sq.p0(i, i))).epsilon(1e-12));
    }
    // R stays squared: the measurement variance is given that way directly
    CHECK(lit.noise.r(0, 0) == doctest::Approx(0.0016).epsilon(1e-12));
  }
}

TEST_CASE("synth config validation") {
  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tve = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = SynthConfig{};
  cfg.pmu_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
