#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "switchtrack/kernels.hpp"
#include "switchtrack/switchopt.hpp"
#include "test_util.hpp"

using namespace switchtrack;
using testutil::vec2;

namespace {

const ExecPolicy serial{Exec::Serial, 0};
const ExecPolicy parallel{Exec::Parallel, 4};

SampleBatch random_batch(const SwitchedTrackingProblem& p, int eta, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.eta = eta;
  auto rng = seeded_engine(seed, {1});
  return sample_batch(cfg, p, rng);
}

}  // namespace

TEST_CASE("feature batches agree bit for bit across implementations") {
  auto p = testutil::vdp_benchmark();
  auto basis = PolynomialBasis::enumerate(3, 3);
  auto batch = random_batch(p, 500, 13);

  Mat phi_serial(500, basis.size()), phi_parallel(500, basis.size());
  kernels::basis_matrix(basis, batch.tsw, batch.x, phi_serial, serial);
  kernels::basis_matrix(basis, batch.tsw, batch.x, phi_parallel, parallel);
  CHECK((phi_serial - phi_parallel).cwiseAbs().maxCoeff() == 0.0);

  // Spot-check rows against the scalar evaluator.
  for (long l = 0; l < 500; l += 97) {
    Vec direct = basis.eval(batch.tsw.row(l).transpose(), batch.x.row(l).transpose());
    CHECK((phi_serial.row(l).transpose() - direct).norm() == 0.0);
  }
}

TEST_CASE("target batches agree bit for bit across implementations") {
  auto p = testutil::vdp_benchmark();
  auto grid = TransformedGrid::make(1, 0.01);
  auto basis = PolynomialBasis::enumerate(3, 3);
  auto batch = random_batch(p, 300, 29);

  auto rng = seeded_engine(5, {2});
  Mat W_current(basis.size(), 2), W_next(basis.size(), 2);
  for (long i = 0; i < W_current.rows(); ++i)
    for (long j = 0; j < 2; ++j) {
      W_current(i, j) = 0.01 * uniform(rng, -1.0, 1.0);
      W_next(i, j) = 0.01 * uniform(rng, -1.0, 1.0);
    }
  Mat Rinv = p.cost.Rbar.inverse();
  ReferenceEvaluator ref(p);

  for (long khat : {grid.nprime / 3, grid.nprime - 1}) {
    const Mat* next = (khat == grid.nprime - 1) ? nullptr : &W_next;
    Mat t_serial = Mat::Zero(300, 2), t_parallel = Mat::Zero(300, 2);
    std::vector<std::uint8_t> ok_serial, ok_parallel;
    kernels::target_batch(p, grid, basis, khat, W_current, next, batch.tsw, batch.x, Rinv, ref,
                          t_serial, ok_serial, serial);
    kernels::target_batch(p, grid, basis, khat, W_current, next, batch.tsw, batch.x, Rinv, ref,
                          t_parallel, ok_parallel, parallel);
    CHECK(ok_serial == ok_parallel);
    CHECK((t_serial - t_parallel).cwiseAbs().maxCoeff() == 0.0);

    // Rows must match the single-sample routine.
    for (long l = 0; l < 300; l += 71) {
      auto single = costate_target(p, grid, basis, khat, W_current, next,
                                   batch.tsw.row(l).transpose(), batch.x.row(l).transpose(),
                                   Rinv, ref);
      REQUIRE(single.has_value() == (ok_serial[static_cast<size_t>(l)] != 0));
      if (single)
        CHECK((t_serial.row(l).transpose() - *single).norm() == 0.0);
    }
  }
}

TEST_CASE("sweep costs agree bit for bit and mark diverging candidates") {
  auto p = testutil::vdp_benchmark();
  auto grid = TransformedGrid::make(1, 0.01);
  auto candidates = uniform_candidates(p, 24);
  Vec x0 = vec2(1.0, -0.5);

  // Stable feedback for most of the horizon.
  auto policy = Policy::custom([](long, const Vec& x) {
    return Vec(Vec::Constant(1, -0.2 * x(1)));
  });

  std::vector<double> c_serial, c_parallel;
  std::vector<std::uint8_t> f_serial, f_parallel;
  kernels::sweep_costs(p, grid, candidates, policy, x0, c_serial, f_serial, serial);
  kernels::sweep_costs(p, grid, candidates, policy, x0, c_parallel, f_parallel, parallel);

  REQUIRE(c_serial.size() == candidates.size());
  CHECK(c_serial == c_parallel);
  CHECK(f_serial == f_parallel);
  for (size_t i = 0; i < candidates.size(); ++i) {
    CHECK(f_serial[i] != 0);
    auto traj = rollout(p, grid, candidates[i], policy, x0);
    CHECK(c_serial[i] == traj.total_cost);
  }

  // A destabilizing policy marks candidates infeasible instead of throwing.
  auto unstable = Policy::custom([](long, const Vec& x) {
    return Vec(Vec::Constant(1, 50.0 * x(1)));
  });
  std::vector<double> c_bad;
  std::vector<std::uint8_t> f_bad;
  kernels::sweep_costs(p, grid, candidates, unstable, x0, c_bad, f_bad, serial);
  for (size_t i = 0; i < candidates.size(); ++i) {
    CHECK(f_bad[i] == 0);
    CHECK(std::isinf(c_bad[i]));
  }
}

TEST_CASE("whole training runs are identical under either execution policy") {
  auto p = testutil::lq_two_mode();
  auto grid = TransformedGrid::make(1, 0.05);
  TrainConfig cfg;
  cfg.basis_degree = 2;
  cfg.eta = 100;
  cfg.seed = 77;

  auto a = train(p, grid, cfg, serial);
  auto b = train(p, grid, cfg, parallel);
  REQUIRE(a.net.weights.size() == b.net.weights.size());
  for (size_t k = 0; k < a.net.weights.size(); ++k)
    CHECK((a.net.weights[k] - b.net.weights[k]).cwiseAbs().maxCoeff() == 0.0);
}
