#include "dse/nonlinearity.hpp"

namespace dse {

PhiIndex index_phi(const StateVector& x, const StatePerturbation& dx,
                   const InputVector& u, const MachineParams& p, double dt,
                   const Mat4& q) {
  if (!(dt > 0.0)) throw ConfigError("index_phi: dt must be > 0");
  const auto phi = [&](const Vec4& v) {
    return euler_substep(StateVector::from_vector(v), u, p, dt).to_vector();
  };
  const auto jac = [&](const Vec4& v) {
    return transition_jacobian(StateVector::from_vector(v), u, p, dt);
  };
  PhiIndex out;
  out.eps = taylor_residual(phi, jac, x.to_vector(), dx.dx);
  out.n = normalized_square<4>(q, out.eps);
  return out;
}

HIndex index_h(const StateVector& x, const StatePerturbation& dx, const InputVector& u,
               const MachineParams& p, const Mat2& r) {
  const auto h = [&](const Vec4& v) {
    return measurement_fn(StateVector::from_vector(v), u, p).to_vector();
  };
  const auto jac = [&](const Vec4& v) {
    return measurement_jacobian(StateVector::from_vector(v), u, p);
  };
  HIndex out;
  out.eps = taylor_residual(h, jac, x.to_vector(), dx.dx);
  out.n = normalized_square<2>(r, out.eps);
  return out;
}

NonlinearityIndexes substep_scaled_indexes(const StateVector& x,
                                           const StatePerturbation& dx,
                                           const InputVector& u, const MachineParams& p,
                                           double dt, int mp, const Mat4& q,
                                           const Mat2& r) {
  const double scale = static_cast<double>(1u << mp);
  const StatePerturbation dxs{dx.dx / scale};
  NonlinearityIndexes idx;
  idx.n_phi = index_phi(x, dxs, u, p, dt / scale, q).n;
  idx.n_h = index_h(x, dxs, u, p, r).n;
  return idx;
}

}  // namespace dse
