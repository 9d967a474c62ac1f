#include "switchtrack/kernels.hpp"

#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace switchtrack {
namespace kernels {

namespace {

int resolve_threads(const ExecPolicy& exec) {
#ifdef _OPENMP
  return exec.threads > 0 ? exec.threads : omp_get_max_threads();
#else
  (void)exec;
  return 1;
#endif
}

}  // namespace

void basis_matrix(const PolynomialBasis& basis, const Mat& tsw, const Mat& x, Mat& phi_out,
                  const ExecPolicy& exec) {
  const long rows = x.rows();
  if (tsw.rows() != rows) throw ValidationError("basis_matrix: sample count mismatch");
  phi_out.resize(rows, basis.size());
  if (exec.mode == Exec::Serial) {
    for (long l = 0; l < rows; ++l)
      phi_out.row(l) =
          basis.eval(tsw.row(l).transpose(), x.row(l).transpose()).transpose();
    return;
  }
  const int nthreads = resolve_threads(exec);
#ifdef _OPENMP
#pragma omp parallel for num_threads(nthreads) schedule(static)
#endif
  for (long l = 0; l < rows; ++l)
    phi_out.row(l) = basis.eval(tsw.row(l).transpose(), x.row(l).transpose()).transpose();
}

void target_batch(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const PolynomialBasis& basis, long khat, const Mat& W_current,
                  const Mat* W_next, const Mat& tsw, const Mat& x, const Mat& Rbar_inv,
                  const ReferenceEvaluator& ref, Mat& targets_out,
                  std::vector<std::uint8_t>& ok, const ExecPolicy& exec) {
  const long rows = x.rows();
  if (tsw.rows() != rows) throw ValidationError("target_batch: sample count mismatch");
  targets_out.resize(rows, p.state_dim());
  ok.assign(static_cast<size_t>(rows), 1);

  auto one = [&](long l) {
    auto t = costate_target(p, grid, basis, khat, W_current, W_next,
                            tsw.row(l).transpose(), x.row(l).transpose(), Rbar_inv, ref);
    if (t) {
      targets_out.row(l) = t->transpose();
    } else {
      targets_out.row(l).setZero();
      ok[static_cast<size_t>(l)] = 0;
    }
  };

  if (exec.mode == Exec::Serial) {
    for (long l = 0; l < rows; ++l) one(l);
    return;
  }
  const int nthreads = resolve_threads(exec);
#ifdef _OPENMP
#pragma omp parallel for num_threads(nthreads) schedule(static)
#endif
  for (long l = 0; l < rows; ++l) one(l);
}

void sweep_costs(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                 const std::vector<SwitchVector>& candidates, const Policy& policy,
                 const Vec& x0, std::vector<double>& costs,
                 std::vector<std::uint8_t>& feasible, const ExecPolicy& exec) {
  const long count = static_cast<long>(candidates.size());
  costs.assign(static_cast<size_t>(count), std::numeric_limits<double>::infinity());
  feasible.assign(static_cast<size_t>(count), 0);

  // Exceptions stay inside each slot so the loop is OpenMP-safe; divergence
  // just marks the candidate infeasible.
  auto one = [&](long c) {
    try {
      Trajectory traj = rollout(p, grid, candidates[static_cast<size_t>(c)], policy, x0);
      costs[static_cast<size_t>(c)] = traj.total_cost;
      feasible[static_cast<size_t>(c)] = 1;
    } catch (const DivergenceError&) {
    } catch (const NumericalError&) {
    }
  };

  if (exec.mode == Exec::Serial) {
    for (long c = 0; c < count; ++c) one(c);
    return;
  }
  const int nthreads = resolve_threads(exec);
#ifdef _OPENMP
#pragma omp parallel for num_threads(nthreads) schedule(dynamic)
#endif
  for (long c = 0; c < count; ++c) one(c);
}

}  // namespace kernels
}  // namespace switchtrack
