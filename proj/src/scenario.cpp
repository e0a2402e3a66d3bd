#include "dse/scenario.hpp"

#include <cmath>

#include "dse/csv_io.hpp"

namespace dse {

double damping_for_profile(DampingProfile profile) {
  // Configuration defaults: a bare machine for sustained swings, a heavily
  // damped one standing in for stabilizer action.
  return profile == DampingProfile::lightly_damped ? 0.0 : 25.0;
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("scenario: duration must be > 0");
  if (!(dt_sim > 0.0)) throw ConfigError("scenario: dt_sim must be > 0");
  if (fault_start < 0.0) throw ConfigError("scenario: fault_start must be >= 0");
  if (!(fault_clear_near > 0.0) || !(fault_clear_remote >= fault_clear_near))
    throw ConfigError("scenario: clearing times must satisfy 0 < near <= remote");
  if (!(v_inf > 0.0)) throw ConfigError("scenario: v_inf must be > 0");
  if (!(x_e_pre > 0.0) || !(x_e_post > 0.0) || x_e_fault < 0.0)
    throw ConfigError("scenario: reactances must be positive (x_e_fault >= 0)");
  if (!(op.p_active >= 0.0) || !(op.v_terminal > 0.0))
    throw ConfigError("scenario: operating point must have P >= 0, V_t > 0");
}

std::pair<double, double> ScenarioConfig::network_at(double t) const {
  if (t < fault_start) return {v_inf, x_e_pre};
  if (t < fault_start + fault_clear_near) return {0.0, x_e_fault};
  if (t < fault_start + fault_clear_remote) return {v_inf, x_e_fault + x_e_post};
  return {v_inf, x_e_post};
}

NetworkSolution solve_stator_network(const StateVector& x, double v_src, double x_e,
                                     const MachineParams& p) {
  // The terminal voltage is linear in the currents: e = e0 + M i. Columns of
  // M come from unit-current evaluations of the shared measurement model.
  const Vec2 e0 = measurement_fn(x, {0.0, 0.0, 0.0, 0.0}, p).to_vector();
  const Vec2 col_r = measurement_fn(x, {0.0, 0.0, 1.0, 0.0}, p).to_vector() - e0;
  const Vec2 col_i = measurement_fn(x, {0.0, 0.0, 0.0, 1.0}, p).to_vector() - e0;

  Mat2 m;
  m.col(0) = col_r;
  m.col(1) = col_i;
  Mat2 line;
  line << 0.0, -x_e, x_e, 0.0;

  const Mat2 a = m - line;
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  if (std::abs(det) < 1e-12)
    throw ConfigError("stator network solve: singular system (degenerate reactances)");
  const Vec2 rhs = Vec2{v_src, 0.0} - e0;
  const Vec2 i{(rhs[0] * a(1, 1) - rhs[1] * a(0, 1)) / det,
               (a(0, 0) * rhs[1] - a(1, 0) * rhs[0]) / det};

  NetworkSolution sol;
  sol.ir = i[0];
  sol.ii = i[1];
  sol.e = MeasurementVector::from_vector(e0 + m * i);
  return sol;
}

std::pair<StateVector, InputVector> steady_state_init(const OperatingPoint& op,
                                                      double v_inf, double x_e,
                                                      const MachineParams& p) {
  const double sin_theta = op.p_active * x_e / (op.v_terminal * v_inf);
  if (!(std::abs(sin_theta) <= 1.0))
    throw ConfigError("steady_state_init: infeasible operating point (P too large "
                      "for the given voltages and reactance)");
  const double theta = std::asin(sin_theta);
  const double er = op.v_terminal * std::cos(theta);
  const double ei = op.v_terminal * std::sin(theta);
  // line current from e = v_inf + j x_e i
  const double ir = ei / x_e;
  const double ii = (v_inf - er) / x_e;

  // rotor angle from the q-axis internal EMF e + j x_q i
  const double emf_re = er - p.xq * ii;
  const double emf_im = ei + p.xq * ir;
  const double delta = std::atan2(emf_im, emf_re);

  const DqPair i = to_dq(delta, ir, ii);
  const double s = std::sin(delta), c = std::cos(delta);
  const double a = er + c * p.xd_t * i.d - s * p.xq_t * i.q;
  const double b = ei + s * p.xd_t * i.d + c * p.xq_t * i.q;
  const StateVector x{delta, 0.0, c * a + s * b, s * a - c * b};

  InputVector u;
  u.ir = ir;
  u.ii = ii;
  u.efd = x.eq_p + (p.xd - p.xd_t) * i.d;
  u.tm = electric_torque(x, i, p);

  // defining property check
  const StateVector rates = state_derivative(x, u, p);
  const double norm = std::hypot(std::hypot(rates.delta, rates.domega),
                                 std::hypot(rates.eq_p, rates.ed_p));
  if (!(norm < 1e-8))
    throw ConfigError("steady_state_init: equilibrium residual did not converge");
  return {x, u};
}

namespace {

StateVector add_scaled(const StateVector& x, const StateVector& d, double s) {
  return {x.delta + s * d.delta, x.domega + s * d.domega, x.eq_p + s * d.eq_p,
          x.ed_p + s * d.ed_p};
}

}  // namespace

TruthTrajectory simulate(const ScenarioConfig& cfg, const MachineParams& p) {
  cfg.validate();
  p.validate();

  const auto [x0, u0] = steady_state_init(cfg.op, cfg.v_inf, cfg.x_e_pre, p);
  const double tm0 = u0.tm, efd0 = u0.efd;

  const auto rhs = [&](const StateVector& x, double t) {
    const auto [v_src, x_e] = cfg.network_at(t);
    const NetworkSolution net = solve_stator_network(x, v_src, x_e, p);
    return state_derivative(x, {tm0, efd0, net.ir, net.ii}, p);
  };

  const std::size_t n = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt_sim)) + 1;
  TruthTrajectory traj;
  traj.times.reserve(n);
  traj.states.reserve(n);
  traj.inputs.reserve(n);
  traj.measurements.reserve(n);

  StateVector x = x0;
  const double dt = cfg.dt_sim;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const auto [v_src, x_e] = cfg.network_at(t);
    const NetworkSolution net = solve_stator_network(x, v_src, x_e, p);

    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back({tm0, efd0, net.ir, net.ii});
    traj.measurements.push_back(net.e);

    const StateVector k1 = rhs(x, t);
    const StateVector k2 = rhs(add_scaled(x, k1, 0.5 * dt), t + 0.5 * dt);
    const StateVector k3 = rhs(add_scaled(x, k2, 0.5 * dt), t + 0.5 * dt);
    const StateVector k4 = rhs(add_scaled(x, k3, dt), t + dt);
    x = {x.delta + dt / 6.0 * (k1.delta + 2.0 * k2.delta + 2.0 * k3.delta + k4.delta),
         x.domega + dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega),
         x.eq_p + dt / 6.0 * (k1.eq_p + 2.0 * k2.eq_p + 2.0 * k3.eq_p + k4.eq_p),
         x.ed_p + dt / 6.0 * (k1.ed_p + 2.0 * k2.ed_p + 2.0 * k3.ed_p + k4.ed_p)};

    if (std::abs(x.domega) > 0.5)
      throw InstabilityError("scenario transiently unstable: |domega| > 0.5 pu at t = " +
                             std::to_string(t + dt) + " s");
  }
  return traj;
}

TruthTrajectory ingest_trajectory(const std::filesystem::path& file) {
  TruthTrajectory traj = read_trajectory_csv(file);
  if (traj.size() < 2)
    throw ConfigError("trajectory ingest: need at least two rows");
  const double dt = traj.times[1] - traj.times[0];
  if (!(dt > 0.0)) throw ConfigError("trajectory ingest: times must increase");
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double step = traj.times[k] - traj.times[k - 1];
    if (std::abs(step - dt) > 1e-9)
      throw ConfigError("trajectory ingest: non-uniform time grid at row " +
                        std::to_string(k + 2));
  }
  return traj;
}

void export_trajectory(const TruthTrajectory& traj, const std::filesystem::path& file) {
  write_trajectory_csv(traj, file);
}

}  // namespace dse
