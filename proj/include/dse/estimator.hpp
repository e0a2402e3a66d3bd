#pragma once

#include <span>
#include <vector>

#include "dse/ekf_core.hpp"
#include "dse/machine_model.hpp"

namespace dse {

using GaussianBelief = Gaussian<4>;
using FilterRun = FilterRunT<4>;

/// Diagonal process and measurement noise covariances.
struct NoiseModel {
  Mat4 q = Mat4::Identity();
  Mat2 r = Mat2::Identity();

  void validate() const;
};

/// Adapter binding the machine model to the generic filter core. The
/// transition Jacobian is always the forward-Euler linearization, also
/// when the mean is propagated with the modified Euler option.
struct MachineEkfModel {
  static constexpr int nx = 4;
  static constexpr int nz = 2;
  using Input = InputVector;

  MachineParams params{};
  IntegrationScheme scheme = IntegrationScheme::euler;
  JacobianMode jacobian = JacobianMode::analytic;

  Vec4 transition(const Vec4& x, const InputVector& u, double dt) const {
    return substep(StateVector::from_vector(x), u, params, dt, scheme).to_vector();
  }
  Mat4 transition_jacobian(const Vec4& x, const InputVector& u, double dt) const {
    const StateVector xs = StateVector::from_vector(x);
    return jacobian == JacobianMode::analytic
               ? dse::transition_jacobian(xs, u, params, dt)
               : dse::transition_jacobian_fd(xs, u, params, dt);
  }
  Vec2 measurement(const Vec4& x, const InputVector& u) const {
    return measurement_fn(StateVector::from_vector(x), u, params).to_vector();
  }
  Mat24 measurement_jacobian(const Vec4& x, const InputVector& u) const {
    const StateVector xs = StateVector::from_vector(x);
    return jacobian == JacobianMode::analytic
               ? dse::measurement_jacobian(xs, u, params)
               : dse::measurement_jacobian_fd(xs, u, params);
  }
};

/// Initial belief from the first measurement/input pair: the mean comes
/// from a steady-state back-solve of the machine equations (rotor angle
/// from the q-axis internal EMF by fixed-point iteration, transient
/// voltages by inverting the terminal-voltage relation), the covariance
/// is P0 unchanged. Speed deviation starts at zero.
GaussianBelief init_belief(std::span<const MeasurementVector> z,
                           std::span<const InputVector> u, const MachineParams& p,
                           const Mat4& p0);

GaussianBelief predict_substep(const GaussianBelief& b, const InputVector& u,
                               const MachineParams& p, double dt_sub, const Mat4& q_sub);

GaussianBelief multi_step_predict(const GaussianBelief& b, const InputVector& u,
                                  const MachineParams& p, double dt, int mp,
                                  const NoiseModel& noise, QSubstepMode q_mode);

GaussianBelief correct(const GaussianBelief& b, const MeasurementVector& z,
                       const InputVector& u, const MachineParams& p, const Mat2& r);

struct FilterOptions {
  IntegrationScheme scheme = IntegrationScheme::euler;
  JacobianMode jacobian = JacobianMode::analytic;
};

/// Runs the filter over a full measurement record; initialization happens
/// before the timed section.
FilterRun run_filter(const std::vector<MeasurementVector>& z_seq,
                     const std::vector<InputVector>& u_seq, const MachineParams& p,
                     const NoiseModel& noise, const Mat4& p0, const FilterMode& mode,
                     double dt, const FilterOptions& opts = {});

}  // namespace dse
