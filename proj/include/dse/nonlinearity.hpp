#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dse/errors.hpp"
#include "dse/machine_model.hpp"

namespace dse {

/// The two scalar nonlinearity levels driving the adaptive controller:
/// n_phi for the transition function, n_h for the measurement function.
/// Both are quadratic forms of first-order Taylor residuals, normalized
/// by the corresponding noise covariance, hence non-negative and exactly
/// zero for a zero state perturbation.
struct NonlinearityIndexes {
  double n_phi = 0.0;
  double n_h = 0.0;
};

/// State change over one interval (same ordering/units as StateVector).
struct StatePerturbation {
  Vec4 dx = Vec4::Zero();
};

/// A model is quasi-linear over a step when both indexes are well below 1.
inline bool quasi_linear(const NonlinearityIndexes& idx) {
  return idx.n_phi < 1.0 && idx.n_h < 1.0;
}

/// First-order Taylor residual of a map f at x for perturbation dx:
/// f(x + dx) - [f(x) + J(x) dx]. The map and its Jacobian are passed as
/// callables so that the same formula can be applied to any model.
template <typename F, typename J, int N>
auto taylor_residual(F&& f, J&& jac, const Eigen::Matrix<double, N, 1>& x,
                     const Eigen::Matrix<double, N, 1>& dx) {
  return (f(x + dx) - (f(x) + jac(x) * dx)).eval();
}

/// eps^T W^{-1} eps for a symmetric positive-definite weight W.
/// Diagonal weights (the usual case here) take a per-element fast path;
/// general symmetric matrices go through an LDLT solve.
/// Throws ConfigError when W is singular or not positive definite.
template <int N>
double normalized_square(const Eigen::Matrix<double, N, N>& w,
                         const Eigen::Matrix<double, N, 1>& eps) {
  const bool diagonal = w.isDiagonal(0.0);
  if (diagonal) {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      if (!(w(i, i) > 0.0))
        throw ConfigError("noise covariance has a non-positive diagonal entry");
      acc += eps[i] * eps[i] / w(i, i);
    }
    return acc;
  }
  Eigen::LDLT<Eigen::Matrix<double, N, N>> ldlt(w);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw ConfigError("noise covariance is not symmetric positive definite");
  return eps.dot(ldlt.solve(eps));
}

struct PhiIndex {
  Vec4 eps = Vec4::Zero();
  double n = 0.0;
};

struct HIndex {
  Vec2 eps = Vec2::Zero();
  double n = 0.0;
};

/// Transition-function index over one prediction interval dt:
/// eps_phi = Phi(x+dx) - [Phi(x) + Phi'(x) dx] with Phi the Euler step,
/// n_phi = eps_phi^T Q^{-1} eps_phi.
PhiIndex index_phi(const StateVector& x, const StatePerturbation& dx,
                   const InputVector& u, const MachineParams& p, double dt,
                   const Mat4& q);

/// Measurement-function index: eps_h = h(x+dx) - [h(x) + H(x) dx],
/// n_h = eps_h^T R^{-1} eps_h.
HIndex index_h(const StateVector& x, const StatePerturbation& dx, const InputVector& u,
               const MachineParams& p, const Mat2& r);

/// Both indexes evaluated at the sub-step scale implied by a prediction
/// factor mp: horizon dt/2^mp and perturbation dx/2^mp. At mp = 0 this is
/// the plain full-interval evaluation.
NonlinearityIndexes substep_scaled_indexes(const StateVector& x,
                                           const StatePerturbation& dx,
                                           const InputVector& u, const MachineParams& p,
                                           double dt, int mp, const Mat4& q,
                                           const Mat2& r);

}  // namespace dse
