#pragma once

#include <functional>
#include <iosfwd>

#include "switchtrack/snac.hpp"

namespace switchtrack {

// Closed-loop record on the transformed grid. Rows of states/refs run over
// grid nodes 0..N' (N'+1 of them); controls and stage_costs cover the N'
// steps. total_cost = sum(stage_costs) + terminal_cost.
struct Trajectory {
  Vec that_grid;  // N'+1 scaled times
  Vec t_grid;     // N'+1 mapped physical times
  Mat states;     // (N'+1) x n
  Mat refs;       // (N'+1) x n
  Mat controls;   // N' x m
  Vec stage_costs;
  double terminal_cost = 0.0;
  double total_cost = 0.0;
  long nprime = 0;
};

struct Policy {
  enum class Kind { ZeroControl, CostateFeedback, Custom };

  Kind kind = Kind::ZeroControl;
  const CostateNetwork* net = nullptr;
  std::function<Vec(long, const Vec&)> fn;

  static Policy zero() { return {}; }
  static Policy costate_feedback(const CostateNetwork& net);
  static Policy custom(std::function<Vec(long, const Vec&)> fn);
};

// Reference samples at every grid node's mapped physical time: closed forms
// evaluated exactly, custom ODEs Euler-integrated along this very grid (with
// per-mode derivatives following the segment index).
Mat reference_track(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                    const SwitchVector& sw);

// 0.5 (x - r)' Qbar sigma_j dthat (x - r) + 0.5 u' Rbar sigma_j dthat u at
// step khat, with r taken at the mapped physical time.
double stage_cost(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u);

// u = -Rbar^{-1} g_v(x)' lambda_hat(khat+1); the segment scale cancels
// between the control weight and the input matrix of the scaled dynamics.
Vec policy_from_costates(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const SwitchVector& sw, long khat,
                         const Vec& x);

Vec policy_control(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                   const SwitchVector& sw, const Policy& policy, long khat, const Vec& x);

// Explicit Euler closed-loop rollout from x0. Throws DivergenceError when a
// state leaves 1000x the sampling-box diameter or turns non-finite.
Trajectory rollout(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                   const SwitchVector& sw, const Policy& policy, const Vec& x0);

// Backward costate recursion along a stored trajectory:
// lambda_N' = terminal_factor * S (x - r), then
// lambda_k = Qbar sigma_j dthat (x_k - r_k) + (dx_{k+1}/dx_k)' lambda_{k+1},
// with the stored controls held fixed inside the step jacobian. Rows are
// lambda_0..lambda_N'.
Mat exact_costates_along(const Trajectory& traj, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const SwitchVector& sw);

// CSV: khat,that,t,segment,mode,x1..xn,r1..rn,u1..um,stage_cost with one row
// per step and a terminal row (empty controls, terminal cost in the last
// column). `header_comment` goes first as a '#' line.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                          const std::string& header_comment);

}  // namespace switchtrack
