#include "dse/machine_model.hpp"

#include <cmath>

namespace dse {

void MachineParams::validate() const {
  if (!(h > 0.0)) throw ConfigError("machine: inertia H must be > 0");
  if (!(td0_t > 0.0) || !(tq0_t > 0.0))
    throw ConfigError("machine: open-circuit time constants must be > 0");
  if (!(omega0 > 0.0)) throw ConfigError("machine: omega0 must be > 0");
  if (!(xd_t > 0.0) || !(xq_t > 0.0))
    throw ConfigError("machine: transient reactances must be > 0");
  if (xd < xd_t || xq < xq_t)
    throw ConfigError("machine: synchronous reactance below transient reactance");
  if (kd < 0.0) throw ConfigError("machine: damping factor K_D must be >= 0");
}

DqPair to_dq(double delta, double ir, double ii) {
  const double s = std::sin(delta), c = std::cos(delta);
  return {s * ir - c * ii, c * ir + s * ii};
}

void from_dq(double delta, const DqPair& dq, double& re, double& im) {
  const double s = std::sin(delta), c = std::cos(delta);
  re = s * dq.d + c * dq.q;
  im = -c * dq.d + s * dq.q;
}

double electric_torque(const StateVector& x, const DqPair& idq, const MachineParams& p) {
  return x.ed_p * idq.d + x.eq_p * idq.q + (p.xq_t - p.xd_t) * idq.d * idq.q;
}

MeasurementVector measurement_fn(const StateVector& x, const InputVector& u,
                                 const MachineParams& p) {
  const double s = std::sin(x.delta), c = std::cos(x.delta);
  const DqPair i = to_dq(x.delta, u.ir, u.ii);
  MeasurementVector z;
  z.er = s * x.ed_p + c * x.eq_p - (c * p.xd_t * i.d - s * p.xq_t * i.q);
  z.ei = -c * x.ed_p + s * x.eq_p - (s * p.xd_t * i.d + c * p.xq_t * i.q);
  return z;
}

StateVector state_derivative(const StateVector& x, const InputVector& u,
                             const MachineParams& p) {
  const DqPair i = to_dq(x.delta, u.ir, u.ii);
  const double te = electric_torque(x, i, p);
  StateVector r;
  r.delta = p.omega0 * x.domega;
  r.domega = (u.tm - te - p.kd * x.domega) / (2.0 * p.h);
  r.eq_p = (u.efd - x.eq_p - (p.xd - p.xd_t) * i.d) / p.td0_t;
  r.ed_p = (-x.ed_p + (p.xq - p.xq_t) * i.q) / p.tq0_t;
  return r;
}

StateVector euler_substep(const StateVector& x, const InputVector& u,
                          const MachineParams& p, double dt) {
  const StateVector f = state_derivative(x, u, p);
  return {x.delta + dt * f.delta, x.domega + dt * f.domega, x.eq_p + dt * f.eq_p,
          x.ed_p + dt * f.ed_p};
}

StateVector modified_euler_substep(const StateVector& x, const InputVector& u,
                                   const MachineParams& p, double dt) {
  const StateVector f0 = state_derivative(x, u, p);
  const StateVector xe = euler_substep(x, u, p, dt);
  const StateVector f1 = state_derivative(xe, u, p);
  return {x.delta + 0.5 * dt * (f0.delta + f1.delta),
          x.domega + 0.5 * dt * (f0.domega + f1.domega),
          x.eq_p + 0.5 * dt * (f0.eq_p + f1.eq_p),
          x.ed_p + 0.5 * dt * (f0.ed_p + f1.ed_p)};
}

StateVector substep(const StateVector& x, const InputVector& u, const MachineParams& p,
                    double dt, IntegrationScheme scheme) {
  return scheme == IntegrationScheme::euler ? euler_substep(x, u, p, dt)
                                            : modified_euler_substep(x, u, p, dt);
}

Mat4 transition_jacobian(const StateVector& x, const InputVector& u,
                         const MachineParams& p, double dt) {
  const DqPair i = to_dq(x.delta, u.ir, u.ii);
  // d(i_d)/d(delta) = i_q and d(i_q)/d(delta) = -i_d, so
  // dTe/d(delta) = ed_p*i_q - eq_p*i_d + (xq_t - xd_t)*(i_q^2 - i_d^2).
  const double dte_ddelta =
      x.ed_p * i.q - x.eq_p * i.d + (p.xq_t - p.xd_t) * (i.q * i.q - i.d * i.d);
  const double two_h = 2.0 * p.h;

  Mat4 j = Mat4::Zero();
  j(0, 1) = p.omega0;
  j(1, 0) = -dte_ddelta / two_h;
  j(1, 1) = -p.kd / two_h;
  j(1, 2) = -i.q / two_h;
  j(1, 3) = -i.d / two_h;
  j(2, 0) = -(p.xd - p.xd_t) * i.q / p.td0_t;
  j(2, 2) = -1.0 / p.td0_t;
  j(3, 0) = -(p.xq - p.xq_t) * i.d / p.tq0_t;
  j(3, 3) = -1.0 / p.tq0_t;
  return Mat4::Identity() + dt * j;
}

Mat24 measurement_jacobian(const StateVector& x, const InputVector& u,
                           const MachineParams& p) {
  const double s = std::sin(x.delta), c = std::cos(x.delta);
  const DqPair i = to_dq(x.delta, u.ir, u.ii);
  const double sal = p.xq_t - p.xd_t;

  Mat24 hj = Mat24::Zero();
  hj(0, 0) = c * x.ed_p - s * x.eq_p + sal * (c * i.q - s * i.d);
  hj(0, 2) = c;
  hj(0, 3) = s;
  hj(1, 0) = s * x.ed_p + c * x.eq_p + sal * (c * i.d + s * i.q);
  hj(1, 2) = s;
  hj(1, 3) = -c;
  return hj;
}

Mat4 transition_jacobian_fd(const StateVector& x, const InputVector& u,
                            const MachineParams& p, double dt, double step) {
  Mat4 j;
  const Vec4 base = x.to_vector();
  for (int col = 0; col < 4; ++col) {
    Vec4 hi = base, lo = base;
    hi[col] += step;
    lo[col] -= step;
    const Vec4 fp = euler_substep(StateVector::from_vector(hi), u, p, dt).to_vector();
    const Vec4 fm = euler_substep(StateVector::from_vector(lo), u, p, dt).to_vector();
    j.col(col) = (fp - fm) / (2.0 * step);
  }
  return j;
}

Mat24 measurement_jacobian_fd(const StateVector& x, const InputVector& u,
                              const MachineParams& p, double step) {
  Mat24 j;
  const Vec4 base = x.to_vector();
  for (int col = 0; col < 4; ++col) {
    Vec4 hi = base, lo = base;
    hi[col] += step;
    lo[col] -= step;
    const Vec2 zp = measurement_fn(StateVector::from_vector(hi), u, p).to_vector();
    const Vec2 zm = measurement_fn(StateVector::from_vector(lo), u, p).to_vector();
    j.col(col) = (zp - zm) / (2.0 * step);
  }
  return j;
}

}  // namespace dse
