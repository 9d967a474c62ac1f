// Compares the serial reference kernels against the OpenMP implementations.
// Run with --benchmark_filter=... to narrow; times are per full batch.

#include <benchmark/benchmark.h>

#include "switchtrack/kernels.hpp"
#include "switchtrack/switchopt.hpp"

using namespace switchtrack;

namespace {

SwitchedTrackingProblem benchmark_problem() {
  SwitchedTrackingProblem p;
  Mat A(2, 2), B(2, 1);
  A << 0.0, 1.0, 2.0, -1.0;
  B << 0.0, 1.0;
  p.modes = {ModeDynamics::vanderpol(), ModeDynamics::linear(A, B)};
  p.sequence = {0, 1};
  p.t0 = 0.0;
  p.tf = 3.0;
  p.cost.S = Mat::Identity(2, 2) * 1e5;
  p.cost.Qbar = Mat::Identity(2, 2);
  p.cost.Qbar(0, 0) = 1e5;
  p.cost.Qbar(1, 1) = 1e7;
  p.cost.Rbar = Mat::Constant(1, 1, 1000.0);
  Vec r0(2);
  r0 << 0.0, 0.0;
  p.reference = ReferenceModel::sinusoid(r0);
  p.omega.state_lo = Vec::Constant(2, -4.0);
  p.omega.state_hi = Vec::Constant(2, 4.0);
  p.omega.switch_margin = 0.003;
  return p;
}

struct BatchSetup {
  SwitchedTrackingProblem p = benchmark_problem();
  TransformedGrid grid = TransformedGrid::make(1, 0.001);
  PolynomialBasis basis = PolynomialBasis::enumerate(3, 3);
  ReferenceEvaluator ref{p};
  Mat Rinv = p.cost.Rbar.inverse();

  SampleBatch batch(int eta) const {
    TrainConfig cfg;
    cfg.eta = eta;
    auto rng = seeded_engine(1234, {1});
    return sample_batch(cfg, p, rng);
  }

  Mat weights(std::uint64_t seed) const {
    auto rng = seeded_engine(seed, {2});
    Mat W(basis.size(), p.state_dim());
    for (long i = 0; i < W.rows(); ++i)
      for (long j = 0; j < W.cols(); ++j) W(i, j) = 0.01 * uniform(rng, -1.0, 1.0);
    return W;
  }
};

const BatchSetup& setup() {
  static BatchSetup s;
  return s;
}

ExecPolicy exec_for(long mode) {
  return mode == 0 ? ExecPolicy{Exec::Serial, 0} : ExecPolicy{Exec::Parallel, 0};
}

void BM_basis_matrix(benchmark::State& state) {
  const auto& s = setup();
  auto batch = s.batch(static_cast<int>(state.range(0)));
  ExecPolicy exec = exec_for(state.range(1));
  Mat phi;
  for (auto _ : state) {
    kernels::basis_matrix(s.basis, batch.tsw, batch.x, phi, exec);
    benchmark::DoNotOptimize(phi.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_target_batch(benchmark::State& state) {
  const auto& s = setup();
  auto batch = s.batch(1000);
  ExecPolicy exec = exec_for(state.range(0));
  Mat W_current = s.weights(7), W_next = s.weights(8);
  long khat = s.grid.nprime / 2;
  Mat targets;
  std::vector<std::uint8_t> ok;
  for (auto _ : state) {
    kernels::target_batch(s.p, s.grid, s.basis, khat, W_current, &W_next, batch.tsw, batch.x,
                          s.Rinv, s.ref, targets, ok, exec);
    benchmark::DoNotOptimize(targets.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}

void BM_sweep_costs(benchmark::State& state) {
  const auto& s = setup();
  ExecPolicy exec = exec_for(state.range(0));
  auto candidates = uniform_candidates(s.p, 30);
  auto policy = Policy::custom([](long, const Vec& x) {
    return Vec(Vec::Constant(1, -0.2 * x(1)));
  });
  Vec x0(2);
  x0 << 1.0, -0.5;
  std::vector<double> costs;
  std::vector<std::uint8_t> feasible;
  for (auto _ : state) {
    kernels::sweep_costs(s.p, s.grid, candidates, policy, x0, costs, feasible, exec);
    benchmark::DoNotOptimize(costs.data());
  }
  state.SetItemsProcessed(state.iterations() * 30);
}

}  // namespace

BENCHMARK(BM_basis_matrix)
    ->ArgsProduct({{256, 1024, 4096}, {0, 1}})
    ->ArgNames({"eta", "omp"});
BENCHMARK(BM_target_batch)->Arg(0)->Arg(1)->ArgName("omp");
BENCHMARK(BM_sweep_costs)->Arg(0)->Arg(1)->ArgName("omp");

BENCHMARK_MAIN();
