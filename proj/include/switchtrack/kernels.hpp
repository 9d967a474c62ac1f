#pragma once

#include "switchtrack/rollout.hpp"
#include "switchtrack/snac.hpp"

namespace switchtrack {
namespace kernels {

// Batch kernels come in two implementations selected by ExecPolicy: a plain
// serial loop (the reference) and an OpenMP loop. Every sample/candidate
// writes only its own output slot, so both produce bit-identical results;
// tests and the benchmark target compare them.

// Row l of phi_out = basis features of (tsw.row(l), x.row(l)).
void basis_matrix(const PolynomialBasis& basis, const Mat& tsw, const Mat& x, Mat& phi_out,
                  const ExecPolicy& exec);

// Row l of targets_out = costate target for sample l at step khat; ok[l]
// cleared when propagation produced non-finite values (row left zero).
void target_batch(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const PolynomialBasis& basis, long khat, const Mat& W_current,
                  const Mat* W_next, const Mat& tsw, const Mat& x, const Mat& Rbar_inv,
                  const ReferenceEvaluator& ref, Mat& targets_out,
                  std::vector<std::uint8_t>& ok, const ExecPolicy& exec);

// costs[c] = total rollout cost from x0 under `policy` with switch vector
// candidates[c]; feasible[c] cleared on divergence (cost set to +inf).
void sweep_costs(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                 const std::vector<SwitchVector>& candidates, const Policy& policy,
                 const Vec& x0, std::vector<double>& costs,
                 std::vector<std::uint8_t>& feasible, const ExecPolicy& exec);

}  // namespace kernels
}  // namespace switchtrack
