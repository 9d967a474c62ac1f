#include "switchtrack/oracle.hpp"

namespace switchtrack {

namespace {

struct StepMatrices {
  Mat A, B, Q, R;
};

StepMatrices step_matrices(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                           const SwitchVector& sw, long khat) {
  int j = active_segment(grid, khat);
  int v = p.sequence[static_cast<size_t>(j)];
  const ModeDynamics& mode = p.modes[static_cast<size_t>(v)];
  if (mode.kind != ModeDynamics::Kind::Linear)
    throw ValidationError("oracle requires linear modes (mode " + std::to_string(v + 1) +
                          " is not linear)");
  double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
  const int n = p.state_dim();
  StepMatrices s;
  s.A = Mat::Identity(n, n) + mode.A * h;
  s.B = mode.B * h;
  s.Q = p.cost.Qbar * h;
  s.R = p.cost.Rbar * h;
  return s;
}

}  // namespace

AffineCostateSolution lq_solve(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                               const SwitchVector& sw) {
  validate_or_throw(p);
  if (sw.count() != p.num_switches() || grid.num_switches != p.num_switches())
    throw ValidationError("lq_solve: switch vector/grid disagree with the mode sequence");

  const int n = p.state_dim();
  const long N = grid.nprime;
  Mat refs = reference_track(p, grid, sw);

  AffineCostateSolution sol;
  sol.nprime = N;
  sol.Theta.resize(static_cast<size_t>(N) + 1);
  sol.theta.resize(static_cast<size_t>(N) + 1);
  sol.gain.resize(static_cast<size_t>(N));
  sol.bias.resize(static_cast<size_t>(N));

  sol.Theta[static_cast<size_t>(N)] = p.terminal_factor * p.cost.S;
  sol.theta[static_cast<size_t>(N)] =
      -p.terminal_factor * (p.cost.S * refs.row(N).transpose());

  for (long k = N - 1; k >= 0; --k) {
    StepMatrices s = step_matrices(p, grid, sw, k);
    const Mat& Th1 = sol.Theta[static_cast<size_t>(k + 1)];
    const Vec& th1 = sol.theta[static_cast<size_t>(k + 1)];
    Mat BRB = s.B * s.R.llt().solve(s.B.transpose());
    Mat M = (Mat::Identity(n, n) + Th1 * BRB).partialPivLu().solve(Mat::Identity(n, n));

    Mat Theta = s.Q + s.A.transpose() * M * Th1 * s.A;
    double scale = std::max(1.0, Theta.cwiseAbs().maxCoeff());
    if ((Theta - Theta.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw NumericalError("oracle Riccati iterate lost symmetry at step " + std::to_string(k));
    Theta = 0.5 * (Theta + Theta.transpose());

    sol.Theta[static_cast<size_t>(k)] = Theta;
    sol.theta[static_cast<size_t>(k)] =
        -(s.Q * refs.row(k).transpose()) + s.A.transpose() * (M * th1);
    // u_k = -R^{-1} B' lambda_{k+1}, lambda_{k+1} = M (Theta_{k+1} A x + theta_{k+1})
    Mat RB = s.R.llt().solve(s.B.transpose());
    sol.gain[static_cast<size_t>(k)] = -RB * M * Th1 * s.A;
    sol.bias[static_cast<size_t>(k)] = -RB * (M * th1);
  }
  return sol;
}

Vec oracle_costate(const AffineCostateSolution& sol, long khat, const Vec& x) {
  if (khat < 0 || khat > sol.nprime) throw ValidationError("oracle_costate: bad step index");
  return sol.Theta[static_cast<size_t>(khat)] * x + sol.theta[static_cast<size_t>(khat)];
}

std::pair<Mat, Vec> next_costate_map(const AffineCostateSolution& sol,
                                     const SwitchedTrackingProblem& p,
                                     const TransformedGrid& grid, const SwitchVector& sw,
                                     long khat) {
  if (khat < 0 || khat >= sol.nprime)
    throw ValidationError("next_costate_map: bad step index");
  StepMatrices s = step_matrices(p, grid, sw, khat);
  const int n = p.state_dim();
  const Mat& Th1 = sol.Theta[static_cast<size_t>(khat + 1)];
  const Vec& th1 = sol.theta[static_cast<size_t>(khat + 1)];
  Mat BRB = s.B * s.R.llt().solve(s.B.transpose());
  Mat M = (Mat::Identity(n, n) + Th1 * BRB).partialPivLu().solve(Mat::Identity(n, n));
  return {M * Th1 * s.A, M * th1};
}

Policy oracle_policy(const AffineCostateSolution& sol) {
  return Policy::custom([&sol](long khat, const Vec& x) {
    return Vec(sol.gain.at(static_cast<size_t>(khat)) * x +
               sol.bias.at(static_cast<size_t>(khat)));
  });
}

Vec fd_value_gradient(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                      const SwitchVector& sw, const Policy& policy, const Vec& x0, double h) {
  if (!(h > 0)) throw ValidationError("fd_value_gradient: h must be positive");
  const int n = p.state_dim();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    double jp = rollout(p, grid, sw, policy, xp).total_cost;
    double jm = rollout(p, grid, sw, policy, xm).total_cost;
    g(i) = (jp - jm) / (2.0 * h);
  }
  return g;
}

}  // namespace switchtrack
