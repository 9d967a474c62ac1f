#include "switchtrack/rollout.hpp"

#include <cmath>
#include <ostream>

namespace switchtrack {

Policy Policy::costate_feedback(const CostateNetwork& net) {
  Policy p;
  p.kind = Kind::CostateFeedback;
  p.net = &net;
  return p;
}

Policy Policy::custom(std::function<Vec(long, const Vec&)> fn) {
  Policy p;
  p.kind = Kind::Custom;
  p.fn = std::move(fn);
  return p;
}

Mat reference_track(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                    const SwitchVector& sw) {
  const int n = p.state_dim();
  Mat refs(grid.nprime + 1, n);
  if (p.reference.closed_form()) {
    for (long k = 0; k <= grid.nprime; ++k)
      refs.row(k) = reference_at(p, map_time(p.t0, p.tf, sw, grid.that_at(k))).transpose();
    return refs;
  }
  // Custom ODE: Euler along this grid's mapped times, switching the
  // derivative with the mode sequence when one is given per mode.
  Vec r = p.reference.r0;
  refs.row(0) = r.transpose();
  for (long k = 0; k < grid.nprime; ++k) {
    int j = active_segment(grid, k);
    const auto& deriv = p.reference.per_mode()
                            ? p.reference.derivs[static_cast<size_t>(
                                  p.sequence[static_cast<size_t>(j)])]
                            : p.reference.derivs[0];
    double tk = map_time(p.t0, p.tf, sw, grid.that_at(k));
    double tk1 = map_time(p.t0, p.tf, sw, grid.that_at(k + 1));
    r += deriv(tk) * (tk1 - tk);
    refs.row(k + 1) = r.transpose();
  }
  return refs;
}

double stage_cost(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u) {
  int j = active_segment(grid, khat);
  double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
  Vec e = x - reference_at(p, map_time(p.t0, p.tf, sw, grid.that_at(khat)));
  return 0.5 * h * (e.dot(p.cost.Qbar * e) + u.dot(p.cost.Rbar * u));
}

Vec policy_from_costates(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const SwitchVector& sw, long khat,
                         const Vec& x) {
  Vec tsw = Eigen::Map<const Vec>(sw.times.data(), static_cast<long>(sw.times.size()));
  Vec lam = predict(net, khat, tsw, x);
  int v = active_mode(p, grid, khat);
  Mat g = mode_input_map(p, v, x);
  return -p.cost.Rbar.llt().solve(g.transpose() * lam);
}

Vec policy_control(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                   const SwitchVector& sw, const Policy& policy, long khat, const Vec& x) {
  switch (policy.kind) {
    case Policy::Kind::ZeroControl:
      return Vec::Zero(p.input_dim());
    case Policy::Kind::CostateFeedback:
      if (!policy.net) throw ValidationError("costate-feedback policy has no network");
      return policy_from_costates(*policy.net, p, grid, sw, khat, x);
    case Policy::Kind::Custom:
      return policy.fn(khat, x);
  }
  throw NumericalError("unreachable policy kind");
}

Trajectory rollout(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                   const SwitchVector& sw, const Policy& policy, const Vec& x0) {
  if (sw.count() != p.num_switches() || grid.num_switches != p.num_switches())
    throw ValidationError("rollout: switch vector/grid disagree with the mode sequence");
  if (x0.size() != p.state_dim()) throw ValidationError("rollout: x0 has wrong dimension");

  const int n = p.state_dim();
  const int m = p.input_dim();
  const double guard = 1e3 * p.omega.diameter();

  Trajectory traj;
  traj.nprime = grid.nprime;
  traj.that_grid.resize(grid.nprime + 1);
  traj.t_grid.resize(grid.nprime + 1);
  traj.states.resize(grid.nprime + 1, n);
  traj.controls.resize(grid.nprime, m);
  traj.stage_costs.resize(grid.nprime);
  traj.refs = reference_track(p, grid, sw);

  for (long k = 0; k <= grid.nprime; ++k) {
    traj.that_grid(k) = grid.that_at(k);
    traj.t_grid(k) = map_time(p.t0, p.tf, sw, traj.that_grid(k));
  }

  Vec x = x0;
  traj.states.row(0) = x.transpose();
  for (long k = 0; k < grid.nprime; ++k) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > guard)
      throw DivergenceError("rollout diverged at step " + std::to_string(k), k, x);
    Vec u = policy_control(p, grid, sw, policy, k, x);
    int j = active_segment(grid, k);
    double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
    Vec e = x - traj.refs.row(k).transpose();
    traj.stage_costs(k) = 0.5 * h * (e.dot(p.cost.Qbar * e) + u.dot(p.cost.Rbar * u));
    traj.controls.row(k) = u.transpose();
    x = discrete_step(p, grid, sw, k, x, u);
    traj.states.row(k + 1) = x.transpose();
  }
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > guard)
    throw DivergenceError("rollout diverged at the terminal step", grid.nprime, x);

  Vec e_end = x - traj.refs.row(grid.nprime).transpose();
  traj.terminal_cost = e_end.dot(p.cost.S * e_end);
  traj.total_cost = traj.stage_costs.sum() + traj.terminal_cost;
  return traj;
}

Mat exact_costates_along(const Trajectory& traj, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const SwitchVector& sw) {
  const int n = p.state_dim();
  Mat lambdas(grid.nprime + 1, n);
  Vec e_end = traj.states.row(grid.nprime).transpose() - traj.refs.row(grid.nprime).transpose();
  Vec lam = p.terminal_factor * (p.cost.S * e_end);
  lambdas.row(grid.nprime) = lam.transpose();
  for (long k = grid.nprime - 1; k >= 0; --k) {
    int j = active_segment(grid, k);
    double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
    Vec x = traj.states.row(k).transpose();
    Vec u = traj.controls.row(k).transpose();
    Vec e = x - traj.refs.row(k).transpose();
    Mat J = step_jacobian(p, grid, sw, k, x, u);
    lam = p.cost.Qbar * e * h + J.transpose() * lam;
    lambdas.row(k) = lam.transpose();
  }
  return lambdas;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                          const std::string& header_comment) {
  const int n = p.state_dim();
  const int m = p.input_dim();
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "khat,that,t,segment,mode";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= n; ++i) os << ",r" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  os << ",stage_cost\n";
  for (long k = 0; k <= traj.nprime; ++k) {
    int j = active_segment(grid, k);
    os << k << "," << format_full(traj.that_grid(k)) << "," << format_full(traj.t_grid(k))
       << "," << j << "," << p.sequence[static_cast<size_t>(j)] + 1;
    for (int i = 0; i < n; ++i) os << "," << format_full(traj.states(k, i));
    for (int i = 0; i < n; ++i) os << "," << format_full(traj.refs(k, i));
    if (k < traj.nprime) {
      for (int i = 0; i < m; ++i) os << "," << format_full(traj.controls(k, i));
      os << "," << format_full(traj.stage_costs(k));
    } else {
      for (int i = 0; i < m; ++i) os << ",";
      os << "," << format_full(traj.terminal_cost);
    }
    os << "\n";
  }
}

}  // namespace switchtrack
