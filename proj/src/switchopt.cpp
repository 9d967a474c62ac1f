#include "switchtrack/switchopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace switchtrack {

const ValueCurvePoint& ValueCurve::best() const {
  if (argmin_index < 0) throw NumericalError("value curve has no feasible sample");
  return samples[static_cast<size_t>(argmin_index)];
}

std::vector<SwitchVector> uniform_candidates(const SwitchedTrackingProblem& p, int count) {
  if (p.num_switches() != 1)
    throw ValidationError("uniform_candidates covers single-switch problems only");
  if (count < 1) throw ValidationError("candidate count must be positive");
  double lo = p.t0 + p.switch_margin();
  double hi = p.tf - p.switch_margin();
  std::vector<SwitchVector> cands;
  cands.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.5 * (lo + hi)
                          : lo + (hi - lo) * static_cast<double>(i) /
                                     static_cast<double>(count - 1);
    cands.push_back(SwitchVector{{t}});
  }
  return cands;
}

ValueCurve method3_sweep(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                         const TransformedGrid& grid, const Vec& x0,
                         const std::vector<SwitchVector>& candidates,
                         const ExecPolicy& exec) {
  if (candidates.empty()) throw ValidationError("method3_sweep: no candidates");
  Policy policy = Policy::costate_feedback(net);
  std::vector<double> costs;
  std::vector<std::uint8_t> feasible;
  kernels::sweep_costs(p, grid, candidates, policy, x0, costs, feasible, exec);

  ValueCurve curve;
  curve.method = "method3";
  curve.samples.reserve(candidates.size());
  for (size_t c = 0; c < candidates.size(); ++c)
    curve.samples.push_back({candidates[c].times, costs[c], feasible[c] != 0});
  // strict < keeps the earliest candidate on exact ties
  double best = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < curve.samples.size(); ++c) {
    if (!curve.samples[c].feasible) continue;
    if (curve.samples[c].J < best) {
      best = curve.samples[c].J;
      curve.argmin_index = static_cast<int>(c);
    }
  }
  return curve;
}

ScalarMinimum minimize_scalar(const std::function<double(double)>& objective, double lo,
                              double hi, double tol, int coarse_points) {
  if (!(lo < hi)) throw ValidationError("minimize_scalar: empty interval");
  if (coarse_points < 3) throw ValidationError("minimize_scalar: need at least 3 scan points");

  ScalarMinimum out;
  auto eval = [&](double x) {
    double f = objective(x);
    out.evals.emplace_back(x, f);
    return f;
  };

  std::vector<double> xs(static_cast<size_t>(coarse_points));
  std::vector<double> fs(static_cast<size_t>(coarse_points));
  int best_i = 0;
  int interior_minima = 0;
  bool any_bad = false;
  for (int i = 0; i < coarse_points; ++i) {
    xs[static_cast<size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(coarse_points - 1);
    fs[static_cast<size_t>(i)] = eval(xs[static_cast<size_t>(i)]);
    if (!std::isfinite(fs[static_cast<size_t>(i)])) any_bad = true;
    if (fs[static_cast<size_t>(i)] < fs[static_cast<size_t>(best_i)]) best_i = i;
  }
  for (int i = 1; i + 1 < coarse_points; ++i)
    if (fs[static_cast<size_t>(i)] < fs[static_cast<size_t>(i - 1)] &&
        fs[static_cast<size_t>(i)] < fs[static_cast<size_t>(i + 1)])
      ++interior_minima;
  out.unimodal = !any_bad && interior_minima <= 1;

  double a = xs[static_cast<size_t>(std::max(0, best_i - 1))];
  double b = xs[static_cast<size_t>(std::min(coarse_points - 1, best_i + 1))];
  if (!out.unimodal) {
    out.x = xs[static_cast<size_t>(best_i)];
    out.f = fs[static_cast<size_t>(best_i)];
    return out;
  }

  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval(x2);
    }
  }
  out.x = f1 <= f2 ? x1 : x2;
  out.f = std::min(f1, f2);
  return out;
}

namespace {

double rollout_cost_or_inf(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                           const SwitchVector& sw, const Policy& policy, const Vec& x0) {
  try {
    return rollout(p, grid, sw, policy, x0).total_cost;
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Method1Result method1_scalar(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                             const TransformedGrid& grid, const Vec& x0,
                             const ExecPolicy& exec) {
  const int K = p.num_switches();
  if (K < 1) throw ValidationError("method1_scalar needs at least one switch");
  Policy policy = Policy::costate_feedback(net);
  const double margin = p.switch_margin();
  const double lo = p.t0 + margin;
  const double hi = p.tf - margin;
  const double tol = 1e-3 * (p.tf - p.t0);

  Method1Result result;
  result.evals.method = "method1";

  if (K == 1) {
    auto objective = [&](double t1) {
      double J = rollout_cost_or_inf(p, grid, SwitchVector{{t1}}, policy, x0);
      result.evals.samples.push_back({{t1}, J, std::isfinite(J)});
      return J;
    };
    ScalarMinimum m = minimize_scalar(objective, lo, hi, tol);
    if (!m.unimodal) {
      // Objective does not look unimodal from here; answer with an
      // exhaustive sweep instead.
      result.fell_back = true;
      ValueCurve sweep = method3_sweep(net, p, grid, x0, uniform_candidates(p, 64), exec);
      result.best = SwitchVector{sweep.best().tsw};
      result.J = sweep.best().J;
      result.evals = std::move(sweep);
      result.evals.method = "method1-fallback";
      return result;
    }
    result.best = SwitchVector{{m.x}};
    result.J = m.f;
  } else {
    // Coordinate descent, each coordinate constrained between its neighbors.
    std::vector<double> t(static_cast<size_t>(K));
    for (int j = 0; j < K; ++j)
      t[static_cast<size_t>(j)] =
          lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(K + 1);
    double prev_J = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 20; ++sweep) {
      for (int j = 0; j < K; ++j) {
        double a = (j == 0 ? p.t0 : t[static_cast<size_t>(j - 1)]) + margin;
        double b = (j == K - 1 ? p.tf : t[static_cast<size_t>(j + 1)]) - margin;
        if (!(a < b)) continue;
        auto objective = [&](double tj) {
          auto cand = t;
          cand[static_cast<size_t>(j)] = tj;
          double J = rollout_cost_or_inf(p, grid, SwitchVector{cand}, policy, x0);
          result.evals.samples.push_back({cand, J, std::isfinite(J)});
          return J;
        };
        ScalarMinimum m = minimize_scalar(objective, a, b, tol);
        t[static_cast<size_t>(j)] = m.x;
        result.J = m.f;
      }
      if (std::abs(prev_J - result.J) <= tol * std::max(1.0, std::abs(result.J))) break;
      prev_J = result.J;
    }
    result.best = SwitchVector{t};
  }

  for (size_t i = 0; i < result.evals.samples.size(); ++i)
    if (result.evals.samples[i].feasible &&
        (result.evals.argmin_index < 0 ||
         result.evals.samples[i].J <
             result.evals.samples[static_cast<size_t>(result.evals.argmin_index)].J))
      result.evals.argmin_index = static_cast<int>(i);
  return result;
}

Method2Result method2_analytic(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                               const TransformedGrid& grid, const Vec& x0) {
  if (p.num_switches() != 1)
    throw ValidationError("method2 is unsupported for more than one switching time");
  if (net.weights.empty()) throw ValidationError("method2 needs a trained network");
  (void)grid;

  const Mat& W0 = net.weights.front();
  Method2Result result;
  result.value_poly = integrate_costate_field(net.basis, W0, 1);

  // Path-order disagreement = how far the field is from a gradient field.
  std::vector<int> reversed(static_cast<size_t>(p.state_dim()));
  for (int i = 0; i < p.state_dim(); ++i)
    reversed[static_cast<size_t>(i)] = p.state_dim() - 1 - i;
  PolynomialExpression v_rev = integrate_costate_field(net.basis, W0, 1, &reversed);
  double denom = std::max(result.value_poly.coeff_norm(), 1e-300);
  PolynomialExpression diff = result.value_poly;
  for (const auto& term : v_rev.terms) diff.add_term(-term.coeff, term.expo);
  diff.canonicalize();
  result.curl_defect = diff.coeff_norm() / denom;

  result.univariate = result.value_poly.substitute_state(1, x0);
  double lo = p.t0 + p.switch_margin();
  double hi = p.tf - p.switch_margin();
  double t1 = minimize_univariate_poly(result.univariate, lo, hi);
  result.best = SwitchVector{{t1}};
  result.value_at_best = result.univariate.eval(Vec::Constant(1, t1));
  return result;
}

}  // namespace switchtrack
