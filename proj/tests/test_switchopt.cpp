#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "switchtrack/rollout.hpp"
#include "switchtrack/switchopt.hpp"
#include "test_util.hpp"

using namespace switchtrack;
using testutil::vec2;

namespace {

// One trained network shared by the selection tests; training it once keeps
// the binary fast.
struct TrainedFixture {
  SwitchedTrackingProblem p = testutil::lq_two_mode();
  TransformedGrid grid = TransformedGrid::make(1, 0.02);
  CostateNetwork net;

  TrainedFixture() {
    TrainConfig cfg;
    cfg.basis_degree = 3;
    cfg.eta = 200;
    cfg.seed = 3;
    net = train(p, grid, cfg).net;
  }
};

const TrainedFixture& fixture() {
  static TrainedFixture f;
  return f;
}

}  // namespace

TEST_CASE("candidate grids span the admissible window evenly") {
  auto p = testutil::vdp_benchmark();  // margin 0.003
  auto cands = uniform_candidates(p, 5);
  REQUIRE(cands.size() == 5);
  CHECK(cands.front().times[0] == doctest::Approx(0.003).epsilon(1e-12));
  CHECK(cands.back().times[0] == doctest::Approx(2.997).epsilon(1e-12));
  double spacing = (2.997 - 0.003) / 4.0;
  for (size_t i = 1; i < cands.size(); ++i)
    CHECK(cands[i].times[0] - cands[i - 1].times[0] == doctest::Approx(spacing).epsilon(1e-10));

  auto single = uniform_candidates(p, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].times[0] == doctest::Approx(1.5).epsilon(1e-12));

  auto k0 = testutil::lq_single_mode();
  CHECK_THROWS_AS(uniform_candidates(k0, 3), ValidationError);
}

TEST_CASE("sweeping candidates reports the cost of each trained rollout") {
  const auto& f = fixture();
  Vec x0 = vec2(0.9, -0.4);
  auto cands = uniform_candidates(f.p, 15);
  auto curve = method3_sweep(f.net, f.p, f.grid, x0, cands);

  REQUIRE(curve.samples.size() == 15);
  REQUIRE(curve.argmin_index >= 0);
  double best_j = curve.best().J;
  for (const auto& pt : curve.samples) {
    CHECK(pt.feasible);
    CHECK(std::isfinite(pt.J));
    CHECK(pt.J + 1e-12 >= best_j);
  }

  // Each curve point is exactly one closed-loop rollout.
  for (size_t i = 0; i < cands.size(); i += 5) {
    auto traj = rollout(f.p, f.grid, cands[i], Policy::costate_feedback(f.net), x0);
    CHECK(curve.samples[i].J == doctest::Approx(traj.total_cost).epsilon(1e-12));
  }
}

TEST_CASE("scalar minimization refines unimodal objectives and flags the rest") {
  auto quad = [](double x) { return (x - 1.7) * (x - 1.7); };
  auto m = minimize_scalar(quad, 0.0, 3.0, 1e-6);
  CHECK(m.unimodal);
  CHECK(m.x == doctest::Approx(1.7).epsilon(1e-4));
  CHECK(m.f <= 1e-8);
  CHECK(m.evals.size() >= 16);

  // Multimodal: the flag clears and the coarse-scan minimum comes back
  // unrefined, so it only has to be a plausible basin, not the optimum.
  auto wavy = [](double x) { return std::cos(4.0 * M_PI * x) + 0.05 * x; };
  auto w = minimize_scalar(wavy, 0.0, 3.0, 1e-6);
  CHECK_FALSE(w.unimodal);
  CHECK(w.f <= -0.5);
}

TEST_CASE("scalar search agrees with a dense sweep of the same objective") {
  const auto& f = fixture();
  Vec x0 = vec2(0.9, -0.4);

  auto m1 = method1_scalar(f.net, f.p, f.grid, x0);
  CHECK(m1.best.times[0] > f.p.t0);
  CHECK(m1.best.times[0] < f.p.tf);

  // The line search stops at an argument tolerance of 1e-3 (tf - t0), so its
  // cost can sit a hair on either side of the best grid sample.
  auto dense = method3_sweep(f.net, f.p, f.grid, x0, uniform_candidates(f.p, 64));
  CHECK(std::abs(m1.J - dense.best().J) <= 1e-4 * std::max(1.0, std::abs(dense.best().J)));
  CHECK(std::abs(m1.best.times[0] - dense.best().tsw[0]) <= 0.05);
}

TEST_CASE("the analytic value surrogate is consistent with its own pieces") {
  const auto& f = fixture();
  Vec x0 = vec2(0.9, -0.4);
  auto m2 = method2_analytic(f.net, f.p, f.grid, x0);

  // The surrogate integrates from the reference state, so every term keeps
  // at least one state factor.
  for (const auto& term : m2.value_poly.terms) CHECK(term.expo[1] + term.expo[2] >= 1);

  auto substituted = m2.value_poly.substitute_state(1, x0);
  CHECK(substituted.coeff_distance(m2.univariate) <= 1e-12);

  double margin = f.p.switch_margin();
  CHECK(m2.best.times[0] >= f.p.t0 + margin - 1e-12);
  CHECK(m2.best.times[0] <= f.p.tf - margin + 1e-12);

  Vec t(1);
  t << m2.best.times[0];
  CHECK(m2.value_at_best ==
        doctest::Approx(m2.univariate.eval(t)).epsilon(1e-12));

  CHECK(std::isfinite(m2.curl_defect));
  CHECK(m2.curl_defect >= 0.0);

  auto k2 = f.p;
  k2.modes.push_back(k2.modes[0]);
  k2.sequence = {0, 1, 0};
  auto k2grid = TransformedGrid::make(2, 0.02);
  CHECK_THROWS_AS(method2_analytic(f.net, k2, k2grid, x0), ValidationError);
}

TEST_CASE("jointly scaling costs and weights leaves the selection unchanged") {
  const auto& f = fixture();
  Vec x0 = vec2(0.9, -0.4);
  auto cands = uniform_candidates(f.p, 30);
  auto base = method3_sweep(f.net, f.p, f.grid, x0, cands);

  const double c = 10.0;
  auto scaled_p = f.p;
  scaled_p.cost.S *= c;
  scaled_p.cost.Qbar *= c;
  scaled_p.cost.Rbar *= c;
  auto scaled_net = f.net;
  for (auto& W : scaled_net.weights) W *= c;

  auto scaled = method3_sweep(scaled_net, scaled_p, f.grid, x0, cands);
  REQUIRE(scaled.samples.size() == base.samples.size());
  CHECK(scaled.argmin_index == base.argmin_index);
  for (size_t i = 0; i < base.samples.size(); ++i) {
    double rel = std::abs(scaled.samples[i].J - c * base.samples[i].J) /
                 std::max(1.0, c * std::abs(base.samples[i].J));
    CHECK(rel <= 1e-10);
  }
}
