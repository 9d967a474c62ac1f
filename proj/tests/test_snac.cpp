#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "switchtrack/oracle.hpp"
#include "switchtrack/snac.hpp"
#include "test_util.hpp"

using namespace switchtrack;
using testutil::vec2;

TEST_CASE("hand-built identity weights predict the state back") {
  CostateNetwork net;
  net.basis = PolynomialBasis::enumerate(3, 1);  // (t1, x1, x2)
  net.state_dim = 2;
  net.input_dim = 1;
  net.num_switches = 1;
  net.nprime = 10;
  net.dthat = 0.2;
  net.state_lo = vec2(-4.0, -4.0);
  net.state_hi = vec2(4.0, 4.0);
  Mat W = Mat::Zero(4, 2);
  W(2, 0) = 1.0;  // lambda_1 = x1
  W(3, 1) = 1.0;  // lambda_2 = x2
  net.weights.assign(10, W);

  Vec tsw = Vec::Constant(1, 1.3);
  Vec x = vec2(0.7, -2.1);
  CHECK((net.predict(0, tsw, x) - x).norm() <= 1e-15);
  CHECK((net.predict(9, tsw, x) - x).norm() <= 1e-15);
  CHECK_THROWS_AS(net.predict(10, tsw, x), ValidationError);
  CHECK_THROWS_AS(net.predict(0, Vec(), x), ValidationError);
}

TEST_CASE("training a switch-free linear problem recovers the exact costate maps") {
  auto p = testutil::lq_single_mode();
  auto grid = TransformedGrid::make(0, 0.02);

  TrainConfig cfg;
  cfg.basis_degree = 3;
  cfg.eta = 200;
  cfg.seed = 11;
  auto result = train(p, grid, cfg);

  auto sol = lq_solve(p, grid, SwitchVector{});
  auto rng = seeded_engine(99, {4});
  Vec tsw;  // no switches
  for (long khat : {0L, grid.nprime / 2, grid.nprime - 1}) {
    auto [G, h] = next_costate_map(sol, p, grid, SwitchVector{}, khat);
    for (int trial = 0; trial < 50; ++trial) {
      Vec x = testutil::rand_state(rng, p);
      Vec expected = G * x + h;
      Vec got = result.net.predict(khat, tsw, x);
      CHECK((got - expected).norm() <= 1e-5 * std::max(1.0, expected.norm()));
    }
  }

  CHECK(result.report.steps.size() == static_cast<size_t>(grid.nprime));
  CHECK(result.report.step_weight_norms.size() == static_cast<size_t>(grid.nprime));
  CHECK(result.report.wall_seconds > 0.0);
  CHECK(result.report.total_inner_iterations >= grid.nprime);
}

TEST_CASE("training validates its configuration") {
  auto p = testutil::lq_single_mode();
  auto grid = TransformedGrid::make(0, 0.1);

  TrainConfig tiny;
  tiny.basis_degree = 3;
  tiny.eta = 5;  // fewer samples than basis functions
  CHECK_THROWS_AS(train(p, grid, tiny), ValidationError);

  TrainConfig noiter;
  noiter.eta = 50;
  noiter.max_inner = 0;
  CHECK_THROWS_AS(train(p, grid, noiter), ValidationError);

  auto permode = testutil::lq_two_mode();
  permode.reference = ReferenceModel::custom_ode_per_mode(
      vec2(0.0, 0.0),
      {[](double) { return Vec(vec2(1.0, 0.0)); }, [](double) { return Vec(vec2(0.0, 1.0)); }});
  TrainConfig ok;
  ok.eta = 50;
  auto permode_grid = TransformedGrid::make(1, 0.1);
  CHECK_THROWS_AS(train(permode, permode_grid, ok), ValidationError);

  auto mismatched = TransformedGrid::make(2, 0.1);
  CHECK_THROWS_AS(train(p, mismatched, ok), ValidationError);
}

TEST_CASE("training is a pure function of the seed") {
  auto p = testutil::lq_single_mode();
  auto grid = TransformedGrid::make(0, 0.1);
  TrainConfig cfg;
  cfg.basis_degree = 2;
  cfg.eta = 60;
  cfg.seed = 21;

  auto a = train(p, grid, cfg);
  auto b = train(p, grid, cfg);
  REQUIRE(a.net.weights.size() == b.net.weights.size());
  for (size_t k = 0; k < a.net.weights.size(); ++k)
    CHECK((a.net.weights[k] - b.net.weights[k]).cwiseAbs().maxCoeff() == 0.0);

  cfg.seed = 22;
  auto c = train(p, grid, cfg);
  double dev = 0.0;
  for (size_t k = 0; k < a.net.weights.size(); ++k)
    dev = std::max(dev, (a.net.weights[k] - c.net.weights[k]).cwiseAbs().maxCoeff());
  CHECK(dev > 0.0);
}

TEST_CASE("a fixed batch converges without hitting the iteration cap") {
  auto p = testutil::lq_single_mode();
  auto grid = TransformedGrid::make(0, 0.1);
  TrainConfig cfg;
  cfg.basis_degree = 2;
  cfg.eta = 60;
  cfg.seed = 5;
  cfg.resample = false;

  auto result = train(p, grid, cfg);
  CHECK(result.report.capped_steps == 0);
  for (const auto& step : result.report.steps) CHECK_FALSE(step.capped);
}

TEST_CASE("sample batches respect the box and the switch margins") {
  SwitchedTrackingProblem p = testutil::lq_two_mode();
  p.modes.push_back(p.modes[0]);
  p.sequence = {0, 1, 0};  // two switches
  p.omega.switch_margin = 0.15;

  TrainConfig cfg;
  cfg.eta = 300;
  cfg.seed = 8;
  auto rng = seeded_engine(cfg.seed, {1});
  auto batch = sample_batch(cfg, p, rng);

  REQUIRE(batch.tsw.rows() == 300);
  REQUIRE(batch.tsw.cols() == 2);
  REQUIRE(batch.x.rows() == 300);
  for (long i = 0; i < batch.tsw.rows(); ++i) {
    double t1 = batch.tsw(i, 0), t2 = batch.tsw(i, 1);
    CHECK(t1 >= p.t0 + 0.15);
    CHECK(t2 <= p.tf - 0.15);
    CHECK(t2 - t1 >= 0.15);
    for (int c = 0; c < 2; ++c) {
      CHECK(batch.x(i, c) >= p.omega.state_lo(c));
      CHECK(batch.x(i, c) <= p.omega.state_hi(c));
    }
  }
}

TEST_CASE("the last-step regression target is the terminal costate") {
  auto p = testutil::vdp_benchmark();
  p.terminal_factor = 2.0;
  auto grid = TransformedGrid::make(1, 0.01);
  auto basis = PolynomialBasis::enumerate(3, 1);
  Mat W0 = Mat::Zero(basis.size(), 2);
  Mat Rinv = p.cost.Rbar.inverse();
  ReferenceEvaluator ref(p);

  Vec tsw = Vec::Constant(1, 1.5);
  Vec x = vec2(0.4, -0.7);
  long last = grid.nprime - 1;
  auto target = costate_target(p, grid, basis, last, W0, nullptr, tsw, x, Rinv, ref);
  REQUIRE(target.has_value());

  // Zero weights mean zero control for the step to the terminal node.
  SwitchVector sw{{1.5}};
  Vec xN = discrete_step(p, grid, sw, last, x, Vec::Zero(1));
  Vec expected = 2.0 * p.cost.S * (xN - ref(p.tf));
  CHECK((*target - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("targets that overflow the state range are rejected, not returned") {
  auto p = testutil::vdp_benchmark();
  auto grid = TransformedGrid::make(1, 0.01);
  auto basis = PolynomialBasis::enumerate(3, 1);
  Mat W = Mat::Zero(basis.size(), 2);
  Mat Rinv = p.cost.Rbar.inverse();
  ReferenceEvaluator ref(p);

  Vec tsw = Vec::Constant(1, 1.5);
  Vec huge = vec2(1e200, 1e200);  // cubic drift overflows in one step
  auto target = costate_target(p, grid, basis, 0, W, &W, tsw, huge, Rinv, ref);
  CHECK_FALSE(target.has_value());
}

TEST_CASE("ridge regression recovers exact linear maps and flags rank loss") {
  auto rng = seeded_engine(31, {6});
  Mat phi(50, 4);
  for (long i = 0; i < phi.rows(); ++i)
    for (long j = 0; j < phi.cols(); ++j) phi(i, j) = uniform(rng, -1.0, 1.0);
  Mat W_true(4, 2);
  for (long i = 0; i < 4; ++i)
    for (long j = 0; j < 2; ++j) W_true(i, j) = uniform(rng, -2.0, 2.0);

  Mat fit = least_squares_fit(phi, phi * W_true, 0.0);
  CHECK((fit - W_true).norm() <= 1e-8);

  Mat rank_deficient = phi;
  rank_deficient.col(3) = rank_deficient.col(2);
  Mat targets = rank_deficient * W_true;
  CHECK_THROWS_AS(least_squares_fit(rank_deficient, targets, 0.0), NumericalError);
  CHECK_NOTHROW(least_squares_fit(rank_deficient, targets, 1e-8));

  CHECK_THROWS_AS(least_squares_fit(phi, Mat::Zero(49, 2), 0.0), ValidationError);
  CHECK_THROWS_AS(least_squares_fit(phi, phi * W_true, -1.0), ValidationError);
}
