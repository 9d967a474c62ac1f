#pragma once

#include "switchtrack/rollout.hpp"

namespace switchtrack {

// Exact costates for all-linear problems: lambda_k = Theta_k x_k + theta_k
// along the optimal closed loop, obtained by a backward affine recursion on
// the Euler-discretized scaled dynamics. Gains give the optimal control as
// u_k = gain_k x_k + bias_k.
struct AffineCostateSolution {
  std::vector<Mat> Theta;  // nprime+1 matrices
  std::vector<Vec> theta;
  std::vector<Mat> gain;   // nprime matrices
  std::vector<Vec> bias;
  long nprime = 0;
};

// Backward recursion with A_k = I + A_v sigma_j dthat, B_k = B_v sigma_j
// dthat, Q_k = Qbar sigma_j dthat, R_k = Rbar sigma_j dthat:
//   M     = (I + Theta_{k+1} B_k R_k^{-1} B_k')^{-1}
//   Theta_k = Q_k + A_k' M Theta_{k+1} A_k
//   theta_k = -Q_k r_k + A_k' M theta_{k+1}
// from Theta_N' = terminal_factor * S, theta_N' = -terminal_factor * S r_N'.
// Rejects problems with non-linear modes.
AffineCostateSolution lq_solve(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                               const SwitchVector& sw);

Vec oracle_costate(const AffineCostateSolution& sol, long khat, const Vec& x);

// Affine map from the state at khat to the on-policy costate at khat+1:
// lambda_{k+1} = G x_k + h. This is what the per-step approximators learn.
std::pair<Mat, Vec> next_costate_map(const AffineCostateSolution& sol,
                                     const SwitchedTrackingProblem& p,
                                     const TransformedGrid& grid, const SwitchVector& sw,
                                     long khat);

// Optimal feedback u_k = gain_k x + bias_k as a rollout policy.
Policy oracle_policy(const AffineCostateSolution& sol);

// Central finite differences of the rollout cost with respect to x0.
Vec fd_value_gradient(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                      const SwitchVector& sw, const Policy& policy, const Vec& x0, double h);

}  // namespace switchtrack
