#pragma once

#include <Eigen/Dense>

#include "dse/errors.hpp"

namespace dse {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;

/// Physical constants of the 4th-order two-axis generator model.
/// All reactances and time constants are per-unit / seconds on the
/// machine base; omega0 is the synchronous electrical speed in rad/s.
struct MachineParams {
  double h = 6.5;        // inertia constant (s)
  double kd = 0.0;       // damping torque coefficient (pu/pu speed)
  double omega0 = 2.0 * 3.14159265358979323846 * 60.0;  // rad/s
  double xd = 1.8;       // d-axis synchronous reactance
  double xq = 1.7;       // q-axis synchronous reactance
  double xd_t = 0.3;     // d-axis transient reactance
  double xq_t = 0.55;    // q-axis transient reactance
  double td0_t = 8.0;    // d-axis open-circuit transient time constant (s)
  double tq0_t = 0.4;    // q-axis open-circuit transient time constant (s)

  // Throws ConfigError when a physical invariant is violated.
  void validate() const;
};

/// Dynamic state [delta, domega, eq_p, ed_p]: rotor angle (rad, unwrapped),
/// rotor speed deviation (pu), q- and d-axis transient voltages (pu).
struct StateVector {
  double delta = 0.0;
  double domega = 0.0;
  double eq_p = 0.0;
  double ed_p = 0.0;

  Vec4 to_vector() const { return {delta, domega, eq_p, ed_p}; }
  static StateVector from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Known inputs [T_m, E_fd, i_R, i_I]: mechanical torque, field voltage,
/// terminal current phasor in the network (R-I) frame.
struct InputVector {
  double tm = 0.0;
  double efd = 0.0;
  double ir = 0.0;
  double ii = 0.0;

  Vec4 to_vector() const { return {tm, efd, ir, ii}; }
  static InputVector from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Terminal voltage phasor [e_R, e_I] in the network frame.
struct MeasurementVector {
  double er = 0.0;
  double ei = 0.0;

  Vec2 to_vector() const { return {er, ei}; }
  static MeasurementVector from_vector(const Vec2& v) { return {v[0], v[1]}; }
};

/// A d/q-axis component pair (stator currents and intermediates).
struct DqPair {
  double d = 0.0;
  double q = 0.0;
};

/// Rotates a network-frame current phasor into the rotor d-q frame.
DqPair to_dq(double delta, double ir, double ii);

/// Inverse rotation: d-q components back to the network frame.
void from_dq(double delta, const DqPair& dq, double& re, double& im);

/// Air-gap electric torque of the two-axis transient model.
double electric_torque(const StateVector& x, const DqPair& idq, const MachineParams& p);

/// Terminal voltage phasor as a function of state and inputs.
MeasurementVector measurement_fn(const StateVector& x, const InputVector& u,
                                 const MachineParams& p);

/// Right-hand side of the machine differential equations (per-second rates).
StateVector state_derivative(const StateVector& x, const InputVector& u,
                             const MachineParams& p);

/// One forward-Euler step of length dt.
StateVector euler_substep(const StateVector& x, const InputVector& u,
                          const MachineParams& p, double dt);

/// One Heun (modified Euler) step of length dt.
StateVector modified_euler_substep(const StateVector& x, const InputVector& u,
                                   const MachineParams& p, double dt);

enum class IntegrationScheme { euler, modified_euler };

StateVector substep(const StateVector& x, const InputVector& u, const MachineParams& p,
                    double dt, IntegrationScheme scheme);

/// Analytic Jacobian of euler_substep: I + dt * df/dx evaluated at x.
Mat4 transition_jacobian(const StateVector& x, const InputVector& u,
                         const MachineParams& p, double dt);

/// Analytic Jacobian of measurement_fn with respect to the state.
/// The domega column is identically zero.
Mat24 measurement_jacobian(const StateVector& x, const InputVector& u,
                           const MachineParams& p);

// Central-difference fallbacks (selectable in configuration; the analytic
// forms are the default for speed and determinism).
Mat4 transition_jacobian_fd(const StateVector& x, const InputVector& u,
                            const MachineParams& p, double dt, double step = 1e-6);
Mat24 measurement_jacobian_fd(const StateVector& x, const InputVector& u,
                              const MachineParams& p, double step = 1e-6);

enum class JacobianMode { analytic, finite_difference };

}  // namespace dse
