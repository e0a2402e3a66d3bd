#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <vector>

#include "dse/errors.hpp"
#include "dse/nonlinearity.hpp"

// Generic EKF machinery with (adaptive) multi-step prediction. A model type M
// provides:
//
//   static constexpr int nx, nz;
//   using Input = ...;
//   VecN  transition(const VecN& x, const Input& u, double dt) const;      // one sub-step
//   MatNN transition_jacobian(const VecN& x, const Input& u, double dt) const;
//   VecZ  measurement(const VecN& x, const Input& u) const;
//   MatZN measurement_jacobian(const VecN& x, const Input& u) const;
//
// The machine-bound front end lives in estimator.hpp.

namespace dse {

/// State estimate: mean plus covariance, re-symmetrized after every update.
template <int N>
struct Gaussian {
  Eigen::Matrix<double, N, 1> mean = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> cov = Eigen::Matrix<double, N, N>::Zero();

  void symmetrize() { cov = (0.5 * (cov + cov.transpose())).eval(); }
};

/// How process noise is applied per prediction sub-step: `paper_literal`
/// adds the full interval covariance Q at every sub-step; `scaled` adds
/// Q/2^mp so the total over the interval stays Q.
enum class QSubstepMode { paper_literal, scaled };

/// Thresholds and limits of the adaptive multi-step prediction controller.
struct AmspConfig {
  double upper = 0.3;
  double lower = 0.005;
  int m_max = 5;
  int m_init = 0;
  QSubstepMode q_substep_mode = QSubstepMode::paper_literal;

  void validate() const {
    if (!(lower > 0.0) || !(upper > lower))
      throw ConfigError("amsp: thresholds must satisfy 0 < lower < upper");
    if (m_init < 0 || m_max < 0 || m_init > m_max)
      throw ConfigError("amsp: prediction factors must satisfy 0 <= m_init <= m_max");
  }
};

/// Estimator variant: plain EKF, constant multi-step (fixed factor), or
/// adaptive multi-step.
struct FilterMode {
  enum class Kind { ekf, cmsp, amsp };
  Kind kind = Kind::ekf;
  int m_fixed = 0;
  AmspConfig amsp{};
  QSubstepMode q_substep = QSubstepMode::paper_literal;

  static FilterMode make_ekf(QSubstepMode q = QSubstepMode::paper_literal) {
    FilterMode m;
    m.kind = Kind::ekf;
    m.q_substep = q;
    return m;
  }
  static FilterMode make_cmsp(int m_fixed, QSubstepMode q = QSubstepMode::paper_literal) {
    FilterMode m;
    m.kind = Kind::cmsp;
    m.m_fixed = m_fixed;
    m.q_substep = q;
    return m;
  }
  static FilterMode make_amsp(const AmspConfig& cfg) {
    FilterMode m;
    m.kind = Kind::amsp;
    m.amsp = cfg;
    m.q_substep = cfg.q_substep_mode;
    return m;
  }

  QSubstepMode effective_q_mode() const {
    return kind == Kind::amsp ? amsp.q_substep_mode : q_substep;
  }
  int initial_mp() const {
    switch (kind) {
      case Kind::cmsp: return m_fixed;
      case Kind::amsp: return amsp.m_init;
      default: return 0;
    }
  }
};

/// Adjusts the prediction factor by at most one per measurement step:
/// any index above `upper` raises it, both below `lower` drops it,
/// otherwise it is left unchanged. Clamped to [0, m_max].
inline int amsp_update(int mp, const NonlinearityIndexes& idx, const AmspConfig& cfg) {
  if (idx.n_phi > cfg.upper || idx.n_h > cfg.upper) return std::min(mp + 1, cfg.m_max);
  if (idx.n_phi < cfg.lower && idx.n_h < cfg.lower) return std::max(mp - 1, 0);
  return mp;
}

/// One prediction sub-step: the mean advances through the model transition,
/// the covariance through the transition Jacobian evaluated at the pre-step
/// mean, plus the per-sub-step process noise.
template <class M>
Gaussian<M::nx> predict_substep(const M& model, const Gaussian<M::nx>& b,
                                const typename M::Input& u, double dt_sub,
                                const Eigen::Matrix<double, M::nx, M::nx>& q_sub) {
  if (!(dt_sub > 0.0)) throw ConfigError("predict_substep: dt must be > 0");
  const auto f = model.transition_jacobian(b.mean, u, dt_sub);
  Gaussian<M::nx> out;
  out.mean = model.transition(b.mean, u, dt_sub);
  out.cov = f * b.cov * f.transpose() + q_sub;
  out.symmetrize();
  return out;
}

/// Runs 2^mp prediction sub-steps of length dt/2^mp with the input held
/// constant over the interval.
template <class M>
Gaussian<M::nx> multi_step_predict(const M& model, const Gaussian<M::nx>& b,
                                   const typename M::Input& u, double dt, int mp,
                                   const Eigen::Matrix<double, M::nx, M::nx>& q,
                                   QSubstepMode q_mode) {
  if (mp < 0) throw ConfigError("multi_step_predict: mp must be >= 0");
  const int n = 1 << mp;
  const double dt_sub = dt / n;
  const Eigen::Matrix<double, M::nx, M::nx> q_sub =
      q_mode == QSubstepMode::paper_literal ? q : (q / n).eval();
  Gaussian<M::nx> out = b;
  for (int i = 0; i < n; ++i) out = predict_substep(model, out, u, dt_sub, q_sub);
  return out;
}

/// Measurement update with gain K = P H^T (H P H^T + R)^{-1}; the
/// measurement Jacobian is evaluated at the prior mean.
template <class M>
Gaussian<M::nx> ekf_correct(const M& model, const Gaussian<M::nx>& b,
                            const Eigen::Matrix<double, M::nz, 1>& z,
                            const typename M::Input& u,
                            const Eigen::Matrix<double, M::nz, M::nz>& r) {
  constexpr int NX = M::nx, NZ = M::nz;
  const Eigen::Matrix<double, NZ, NX> h = model.measurement_jacobian(b.mean, u);
  const Eigen::Matrix<double, NZ, NZ> s = h * b.cov * h.transpose() + r;
  Eigen::LDLT<Eigen::Matrix<double, NZ, NZ>> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw NumericalError("innovation covariance is numerically singular");
  const Eigen::Matrix<double, NX, NZ> k = ldlt.solve(h * b.cov).transpose();
  Gaussian<NX> out;
  out.mean = b.mean + k * (z - model.measurement(b.mean, u));
  out.cov = (Eigen::Matrix<double, NX, NX>::Identity() - k * h) * b.cov;
  out.symmetrize();
  return out;
}

/// Trajectory of a filter execution: one posterior, one prediction factor
/// and one index pair per measurement processed.
template <int N>
struct FilterRunT {
  std::vector<Gaussian<N>> estimates;
  std::vector<int> mp_trace;
  std::vector<NonlinearityIndexes> index_trace;
  double wall_time_s = 0.0;
};

/// Full filter recursion over a measurement record.
///
/// Per step k >= 1: predict from the previous posterior with the active
/// prediction factor, evaluate the nonlinearity indexes with the predicted
/// state change dx = x_k(-) - x_{k-1}(+), correct with z_k, and (in amsp
/// mode) update the factor for the next interval from the full-interval
/// indexes. The recorded index trace is evaluated at the active sub-step
/// scale (dx and horizon both divided by 2^mp), which is what a fixed-factor
/// run exhibits per sub-step; at mp = 0 the two notions coincide.
///
/// Wall time covers the first prediction through the last correction.
template <class M>
FilterRunT<M::nx> run_filter(const M& model,
                             const std::vector<Eigen::Matrix<double, M::nz, 1>>& z_seq,
                             const std::vector<typename M::Input>& u_seq,
                             const Eigen::Matrix<double, M::nx, M::nx>& q,
                             const Eigen::Matrix<double, M::nz, M::nz>& r,
                             const Gaussian<M::nx>& init, const FilterMode& mode,
                             double dt) {
  constexpr int NX = M::nx;
  if (z_seq.size() != u_seq.size())
    throw ConfigError("run_filter: measurement and input sequences differ in length");
  if (z_seq.size() < 2) throw ConfigError("run_filter: need at least two measurements");
  if (!(dt > 0.0)) throw ConfigError("run_filter: dt must be > 0");
  if (mode.kind == FilterMode::Kind::amsp) mode.amsp.validate();
  if (mode.kind == FilterMode::Kind::cmsp && mode.m_fixed < 0)
    throw ConfigError("run_filter: fixed prediction factor must be >= 0");

  const QSubstepMode q_mode = mode.effective_q_mode();
  const std::size_t steps = z_seq.size();

  FilterRunT<NX> run;
  run.estimates.reserve(steps);
  run.mp_trace.reserve(steps);
  run.index_trace.reserve(steps);

  Gaussian<NX> belief = init;
  int mp = mode.initial_mp();
  run.estimates.push_back(belief);
  run.mp_trace.push_back(mp);
  run.index_trace.push_back({});

  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 1; k < steps; ++k) {
    try {
      const typename M::Input& u_prev = u_seq[k - 1];
      const Gaussian<NX> prior = multi_step_predict(model, belief, u_prev, dt, mp, q, q_mode);
      const Eigen::Matrix<double, NX, 1> dx = prior.mean - belief.mean;

      const auto phi_full = [&](const Eigen::Matrix<double, NX, 1>& v) {
        return model.transition(v, u_prev, dt);
      };
      const auto phi_jac = [&](const Eigen::Matrix<double, NX, 1>& v) {
        return model.transition_jacobian(v, u_prev, dt);
      };
      const auto h_fn = [&](const Eigen::Matrix<double, NX, 1>& v) {
        return model.measurement(v, u_prev);
      };
      const auto h_jac = [&](const Eigen::Matrix<double, NX, 1>& v) {
        return model.measurement_jacobian(v, u_prev);
      };

      // Full-interval indexes drive the controller so that it reacts to the
      // un-subdivided nonlinearity of the measurement interval.
      NonlinearityIndexes ctrl;
      ctrl.n_phi = normalized_square<NX>(
          q, taylor_residual(phi_full, phi_jac, belief.mean, dx));
      ctrl.n_h =
          normalized_square<M::nz>(r, taylor_residual(h_fn, h_jac, belief.mean, dx));

      NonlinearityIndexes recorded = ctrl;
      if (mp > 0) {
        const double scale = static_cast<double>(1 << mp);
        const Eigen::Matrix<double, NX, 1> dx_sub = dx / scale;
        const double dt_sub = dt / scale;
        const auto phi_sub = [&](const Eigen::Matrix<double, NX, 1>& v) {
          return model.transition(v, u_prev, dt_sub);
        };
        const auto phi_sub_jac = [&](const Eigen::Matrix<double, NX, 1>& v) {
          return model.transition_jacobian(v, u_prev, dt_sub);
        };
        recorded.n_phi = normalized_square<NX>(
            q, taylor_residual(phi_sub, phi_sub_jac, belief.mean, dx_sub));
        recorded.n_h = normalized_square<M::nz>(
            r, taylor_residual(h_fn, h_jac, belief.mean, dx_sub));
      }

      belief = ekf_correct(model, prior, z_seq[k], u_seq[k], r);

      run.estimates.push_back(belief);
      run.mp_trace.push_back(mp);
      run.index_trace.push_back(recorded);

      if (mode.kind == FilterMode::Kind::amsp) mp = amsp_update(mp, ctrl, mode.amsp);

      if (!belief.mean.allFinite())
        throw NumericalError("state estimate is not finite");
    } catch (const NumericalError& e) {
      throw NumericalError("step " + std::to_string(k) + ": " + e.what());
    }
  }
  run.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace dse
