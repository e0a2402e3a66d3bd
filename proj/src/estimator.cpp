#include "dse/estimator.hpp"

#include <cmath>

namespace dse {

void NoiseModel::validate() const {
  if (!q.isDiagonal(0.0) || !r.isDiagonal(0.0))
    throw ConfigError("noise model: Q and R must be diagonal");
  for (int i = 0; i < 4; ++i)
    if (!(q(i, i) > 0.0)) throw ConfigError("noise model: Q diagonal must be > 0");
  for (int i = 0; i < 2; ++i)
    if (!(r(i, i) > 0.0)) throw ConfigError("noise model: R diagonal must be > 0");
}

GaussianBelief init_belief(std::span<const MeasurementVector> z,
                           std::span<const InputVector> u, const MachineParams& p,
                           const Mat4& p0) {
  if (z.empty() || u.empty())
    throw ConfigError("init_belief: need at least one measurement/input pair");
  const MeasurementVector& z0 = z.front();
  const InputVector& u0 = u.front();

  double delta = 0.0;
  double eq_p = 0.0, ed_p = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const double s = std::sin(delta), c = std::cos(delta);
    const DqPair i = to_dq(delta, u0.ir, u0.ii);
    // invert the terminal-voltage relation at this angle
    const double a = z0.er + c * p.xd_t * i.d - s * p.xq_t * i.q;
    const double b = z0.ei + s * p.xd_t * i.d + c * p.xq_t * i.q;
    ed_p = s * a - c * b;
    eq_p = c * a + s * b;
    // steady state requires ed_p = (xq - xq_t) iq; the residual maps to an
    // angle error of the q-axis internal EMF
    const double mismatch = ed_p - (p.xq - p.xq_t) * i.q;
    const double emf_q = eq_p + (p.xq - p.xd_t) * i.d;
    if (std::hypot(mismatch, emf_q) < 1e-12)
      throw NumericalError("init_belief: degenerate terminal phasors");
    const double correction = std::atan2(-mismatch, emf_q);
    delta += correction;
    if (std::abs(correction) < 1e-10) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericalError("init_belief: back-solve did not converge");

  GaussianBelief belief;
  belief.mean = StateVector{delta, 0.0, eq_p, ed_p}.to_vector();
  belief.cov = p0;
  return belief;
}

GaussianBelief predict_substep(const GaussianBelief& b, const InputVector& u,
                               const MachineParams& p, double dt_sub, const Mat4& q_sub) {
  return predict_substep(MachineEkfModel{p}, b, u, dt_sub, q_sub);
}

GaussianBelief multi_step_predict(const GaussianBelief& b, const InputVector& u,
                                  const MachineParams& p, double dt, int mp,
                                  const NoiseModel& noise, QSubstepMode q_mode) {
  return multi_step_predict(MachineEkfModel{p}, b, u, dt, mp, noise.q, q_mode);
}

GaussianBelief correct(const GaussianBelief& b, const MeasurementVector& z,
                       const InputVector& u, const MachineParams& p, const Mat2& r) {
  return ekf_correct(MachineEkfModel{p}, b, z.to_vector(), u, r);
}

FilterRun run_filter(const std::vector<MeasurementVector>& z_seq,
                     const std::vector<InputVector>& u_seq, const MachineParams& p,
                     const NoiseModel& noise, const Mat4& p0, const FilterMode& mode,
                     double dt, const FilterOptions& opts) {
  noise.validate();
  const GaussianBelief init = init_belief(z_seq, u_seq, p, p0);

  std::vector<Vec2> z_raw;
  z_raw.reserve(z_seq.size());
  for (const auto& z : z_seq) z_raw.push_back(z.to_vector());

  const MachineEkfModel model{p, opts.scheme, opts.jacobian};
  return run_filter(model, z_raw, u_seq, noise.q, noise.r, init, mode, dt);
}

}  // namespace dse
