#pragma once

#include <optional>

#include "switchtrack/basis.hpp"
#include "switchtrack/model.hpp"
#include "switchtrack/transform.hpp"

namespace switchtrack {

// Per-step costate approximators: weights[khat] maps the basis features of
// (switch times, state at step khat) to the predicted costate at khat + 1.
struct CostateNetwork {
  PolynomialBasis basis;
  int state_dim = 0;
  int input_dim = 0;
  int num_switches = 0;
  long nprime = 0;
  double dthat = 0.0;
  double terminal_factor = 1.0;
  std::uint64_t seed = 0;
  Vec state_lo, state_hi;  // sampling box the fit is valid on
  double switch_margin = 0.0;
  std::vector<Mat> weights;  // nprime matrices, each basis.size() x state_dim

  // Predicted costate at step khat + 1 as a function of the state at khat.
  Vec predict(long khat, const Vec& tsw, const Vec& x) const;
};

struct TrainConfig {
  int basis_degree = 3;
  int eta = 1000;          // samples per inner iteration
  double gamma = 1e-6;     // converged when |dW|_F <= gamma * (1 + |W|_F)
  int max_inner = 50;
  double ridge = -1.0;     // < 0 -> default 1e-9 * eta
  std::uint64_t seed = 0;
  bool resample = true;    // fresh batch each inner iteration (fixed batch for debugging)

  double effective_ridge() const { return ridge < 0 ? 1e-9 * static_cast<double>(eta) : ridge; }
};

struct StepTrainRecord {
  long khat = 0;
  std::vector<double> change_norms;   // |W_{i+1} - W_i|_F per inner iteration
  std::vector<double> residual_rms;   // rms fit residual per inner iteration
  bool capped = false;                // hit max_inner without meeting the tolerance
  int discarded = 0;                  // samples resampled due to non-finite propagation
};

struct TrainReport {
  std::vector<StepTrainRecord> steps;  // ordered by khat (ascending)
  double wall_seconds = 0.0;
  long total_inner_iterations = 0;
  int capped_steps = 0;
  long discarded_samples = 0;
  std::vector<double> step_weight_norms;  // |W_khat|_F per step
  std::vector<double> step_weight_jumps;  // |W_khat - W_{khat-1}|_F, index 0 unused
};

struct TrainResult {
  CostateNetwork net;
  TrainReport report;
};

struct SampleBatch {
  Mat tsw;  // eta x K
  Mat x;    // eta x n
};

// Uniform tuples (t_sw, x): states in the omega box, switch times ordered
// inside [t0 + margin, tf - margin] with pairwise gaps >= margin.
SampleBatch sample_batch(const TrainConfig& cfg, const SwitchedTrackingProblem& p,
                         std::mt19937_64& rng);
// Single tuple, used for deterministic per-slot resampling.
void sample_tuple(const SwitchedTrackingProblem& p, std::mt19937_64& rng, Vec& tsw, Vec& x);

// One regression target for step khat at sample (tsw, x): extract the
// control from W_current, take one discrete step, then evaluate the exact
// backward costate relation using the already-trained next-step weights
// (W_next == nullptr at the last step, where the terminal condition
// terminal_factor * S (x - r) applies). nullopt if propagation left the
// finite range.
std::optional<Vec> costate_target(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                                  const PolynomialBasis& basis, long khat, const Mat& W_current,
                                  const Mat* W_next, const Vec& tsw, const Vec& x,
                                  const Mat& Rbar_inv, const ReferenceEvaluator& ref);
// Same, reading both weight matrices from a trained network.
std::optional<Vec> costate_target(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                                  const TransformedGrid& grid, long khat, const Vec& tsw,
                                  const Vec& x);

// Ridge least squares min |phi W - targets|^2 + ridge |W|^2 via QR of the
// stacked matrix. ridge == 0 on rank-deficient inputs is an error.
Mat least_squares_fit(const Mat& phi, const Mat& targets, double ridge);

// Backward pass over all steps (Algorithm: khat = N'-1 down to 0), least
// squares inner loop per step with fresh batches until the weight change
// meets the tolerance or max_inner is hit.
TrainResult train(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const TrainConfig& cfg, const ExecPolicy& exec = {});

Vec predict(const CostateNetwork& net, long khat, const Vec& tsw, const Vec& x);

}  // namespace switchtrack
