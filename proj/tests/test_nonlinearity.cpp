#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dse/nonlinearity.hpp"
#include "test_helpers.hpp"

using namespace dse;
using dse::testing::random_input;
using dse::testing::random_state;
using dse::testing::test_machine;

TEST_SUITE("nonlinearity") {

TEST_CASE("zero perturbation gives zero indexes") {
  const MachineParams p = test_machine(2.0);
  const Mat4 q = Mat4::Identity() * 1e-6;
  const Mat2 r = Mat2::Identity() * 1.6e-3;
  std::mt19937_64 rng(201);
  for (int k = 0; k < 20; ++k) {
    const StateVector x = random_state(rng);
    const InputVector u = random_input(rng);
    const PhiIndex pi = index_phi(x, {}, u, p, 0.04, q);
    CHECK(pi.eps.norm() == 0.0);
    CHECK(pi.n == 0.0);
    CHECK(index_h(x, {}, u, p, r).n == 0.0);
  }
}

TEST_CASE("quadratic toy model matches the closed form") {
  // f(x) = x^2 pushed through the same residual/normalization formulas
  using Vec1 = Eigen::Matrix<double, 1, 1>;
  using Mat1 = Eigen::Matrix<double, 1, 1>;
  const auto f = [](const Vec1& v) { return Vec1{v[0] * v[0]}; };
  const auto jac = [](const Vec1& v) { return Mat1{2.0 * v[0]}; };

  const Vec1 x{1.0}, dx{0.1};
  const Vec1 eps = taylor_residual(f, jac, x, dx);
  CHECK(eps[0] == doctest::Approx(0.01).epsilon(1e-12));

  const double n = normalized_square<1>(Mat1{1.0}, eps);
  CHECK(n == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(std::abs(n - std::pow(dx[0], 4)) < 1e-12);
}

TEST_CASE("index scales inversely with the noise covariance") {
  const MachineParams p = test_machine(2.0);
  std::mt19937_64 rng(202);
  const StateVector x = random_state(rng);
  const InputVector u = random_input(rng);
  const StatePerturbation dx{Vec4{0.05, 0.001, 0.02, 0.03}};
  const Mat4 q = Mat4::Identity() * 1e-6;
  const double n1 = index_phi(x, dx, u, p, 0.04, q).n;
  const double n10 = index_phi(x, dx, u, p, 0.04, (10.0 * q).eval()).n;
  CHECK(n10 == doctest::Approx(n1 / 10.0).epsilon(1e-12));
}

TEST_CASE("speed-only perturbations are exact for the measurement map") {
  const MachineParams p = test_machine();
  const Mat2 r = Mat2::Identity() * 1.6e-3;
  std::mt19937_64 rng(203);
  for (int k = 0; k < 20; ++k) {
    const StateVector x = random_state(rng);
    const InputVector u = random_input(rng);
    const StatePerturbation dx{Vec4{0.0, 0.04, 0.0, 0.0}};
    const HIndex hi = index_h(x, dx, u, p, r);
    CHECK(hi.eps.norm() < 1e-15);
    CHECK(hi.n < 1e-12);
  }
}

TEST_CASE("measurement index grows with the fourth power of the perturbation") {
  const MachineParams p = test_machine();
  const Mat2 r = Mat2::Identity() * 1.6e-3;
  std::mt19937_64 rng(204);
  int fits = 0;
  for (int k = 0; k < 20; ++k) {
    const StateVector x = random_state(rng);
    const InputVector u = random_input(rng);
    Vec4 dir = Vec4{1.0, 0.3, 0.8, -0.6}.normalized();
    const double m1 = 1e-4, m2 = 1e-2;
    const double n1 = index_h(x, {Vec4(m1 * dir)}, u, p, r).n;
    const double n2 = index_h(x, {Vec4(m2 * dir)}, u, p, r).n;
    if (n1 <= 0.0 || n2 <= 0.0) continue;
    const double slope = std::log(n2 / n1) / std::log(m2 / m1);
    CHECK(slope == doctest::Approx(4.0).epsilon(0.125));  // 4 +- 0.5
    ++fits;
  }
  CHECK(fits >= 15);
}

TEST_CASE("a linear transition has exactly zero transition index") {
  using Vec3 = Eigen::Vector3d;
  using Mat3 = Eigen::Matrix3d;
  Mat3 a;
  a << -0.2, 1.0, 0.0, -1.0, -0.2, 0.3, 0.0, 0.1, -0.5;
  const double dt = 0.05;
  const auto f = [&](const Vec3& v) { return (v + dt * a * v).eval(); };
  const auto jac = [&](const Vec3&) {
    return (Mat3::Identity() + dt * a).eval();
  };
  std::mt19937_64 rng(205);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x{amp(rng), amp(rng), amp(rng)};
    const Vec3 dx{amp(rng), amp(rng), amp(rng)};
    const Vec3 eps = taylor_residual(f, jac, x, dx);
    const double n = normalized_square<3>(Mat3::Identity(), eps);
    CHECK(n < 1e-12);
  }
}

TEST_CASE("quadratic form is invariant under consistent reordering") {
  std::mt19937_64 rng(206);
  std::uniform_real_distribution<double> amp(0.1, 2.0);
  Vec4 eps{amp(rng), amp(rng), amp(rng), amp(rng)};
  Mat4 q = Mat4::Zero();
  for (int i = 0; i < 4; ++i) q(i, i) = amp(rng);

  const int perm[4] = {2, 0, 3, 1};
  Vec4 eps_p;
  Mat4 q_p = Mat4::Zero();
  for (int i = 0; i < 4; ++i) {
    eps_p[i] = eps[perm[i]];
    q_p(i, i) = q(perm[i], perm[i]);
  }
  CHECK(normalized_square<4>(q, eps) ==
        doctest::Approx(normalized_square<4>(q_p, eps_p)).epsilon(1e-14));
}

TEST_CASE("quasi-linear classification") {
  CHECK(quasi_linear({0.5, 0.5}));
  CHECK(quasi_linear({0.0, 0.0}));
  CHECK_FALSE(quasi_linear({1.5, 0.1}));
  CHECK_FALSE(quasi_linear({0.1, 1.0}));
}

TEST_CASE("invalid noise covariance is rejected") {
  const MachineParams p = test_machine();
  const StateVector x{0.5, 0.0, 1.0, 0.3};
  const InputVector u{0.9, 2.0, 0.5, 0.0};
  const StatePerturbation dx{Vec4{0.01, 0.0, 0.0, 0.0}};

  Mat4 q_bad = Mat4::Identity();
  q_bad(2, 2) = 0.0;
  CHECK_THROWS_AS(index_phi(x, dx, u, p, 0.04, q_bad), ConfigError);

  Mat4 q_indef = Mat4::Identity();
  q_indef(0, 1) = q_indef(1, 0) = 2.0;  // indefinite symmetric
  CHECK_THROWS_AS(index_phi(x, dx, u, p, 0.04, q_indef), ConfigError);

  Mat2 r_bad = Mat2::Zero();
  CHECK_THROWS_AS(index_h(x, dx, u, p, r_bad), ConfigError);
}

TEST_CASE("general symmetric weight agrees with the diagonal fast path") {
  // a diagonal matrix routed through the LDLT branch must give the same
  // value; force the general path with a tiny off-diagonal entry
  const Vec4 eps{0.3, -0.2, 0.1, 0.05};
  Mat4 q = Mat4::Zero();
  q.diagonal() << 2.0, 1.0, 0.5, 0.25;
  const double fast = normalized_square<4>(q, eps);
  Mat4 q_near = q;
  q_near(0, 1) = q_near(1, 0) = 1e-300;
  const double general = normalized_square<4>(q_near, eps);
  CHECK(fast == doctest::Approx(general).epsilon(1e-12));
}

}  // TEST_SUITE
