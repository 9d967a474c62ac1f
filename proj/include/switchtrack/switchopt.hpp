#pragma once

#include "switchtrack/kernels.hpp"

namespace switchtrack {

struct ValueCurvePoint {
  std::vector<double> tsw;
  double J = 0.0;
  bool feasible = false;
};

// Sampled cost-vs-switching-times curve; argmin_index = -1 when no candidate
// was feasible.
struct ValueCurve {
  std::vector<ValueCurvePoint> samples;
  int argmin_index = -1;
  std::string method;

  const ValueCurvePoint& best() const;
};

// Evenly spaced single-switch candidates over [t0 + margin, tf - margin]
// (K = 1 only).
std::vector<SwitchVector> uniform_candidates(const SwitchedTrackingProblem& p, int count);

// Exhaustive sweep: one trained-policy rollout per candidate. Ties pick the
// earliest switching time; diverged candidates are kept in the curve but
// marked infeasible.
ValueCurve method3_sweep(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const Vec& x0,
                         const std::vector<SwitchVector>& candidates,
                         const ExecPolicy& exec = {});

struct ScalarMinimum {
  double x = 0.0;
  double f = 0.0;
  bool unimodal = true;  // coarse scan saw a single basin
  std::vector<std::pair<double, double>> evals;
};

// Coarse-scan bracketing followed by golden-section refinement to tolerance
// `tol`. If the scan shows several interior basins (or failed evaluations),
// unimodal is cleared and the scan minimum is returned.
ScalarMinimum minimize_scalar(const std::function<double(double)>& objective, double lo,
                              double hi, double tol, int coarse_points = 16);

struct Method1Result {
  SwitchVector best;
  double J = 0.0;
  ValueCurve evals;       // every objective evaluation, in evaluation order
  bool fell_back = false; // non-unimodal -> answered by a 64-point sweep
};

// Golden-section search on t1 -> rollout cost (tolerance 1e-3 * (tf - t0)).
// K > 1 runs coordinate descent with the same scalar routine per coordinate.
Method1Result method1_scalar(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                             const TransformedGrid& grid, const Vec& x0,
                             const ExecPolicy& exec = {});

struct Method2Result {
  PolynomialExpression value_poly;  // V(t_sw, x) from the step-0 costate field
  PolynomialExpression univariate;  // V(t1, x0) after substituting x0
  double curl_defect = 0.0;         // relative path-order disagreement
  SwitchVector best;
  double value_at_best = 0.0;
};

// Analytic single-switch method: symbolically line-integrate the step-0
// costate field into a polynomial value surrogate, substitute x0, minimize
// the resulting univariate polynomial over [t0 + margin, tf - margin]. The
// curl defect (forward vs reversed integration path, relative coefficient
// distance) reports how non-conservative the learned field is. K = 1 only.
Method2Result method2_analytic(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                               const TransformedGrid& grid, const Vec& x0);

}  // namespace switchtrack
