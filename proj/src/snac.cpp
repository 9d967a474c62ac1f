#include "switchtrack/snac.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "switchtrack/kernels.hpp"

namespace switchtrack {

Vec CostateNetwork::predict(long khat, const Vec& tsw, const Vec& x) const {
  return switchtrack::predict(*this, khat, tsw, x);
}

Vec predict(const CostateNetwork& net, long khat, const Vec& tsw, const Vec& x) {
  if (khat < 0 || khat >= net.nprime)
    throw ValidationError("predict: step index outside [0, N'-1]");
  if (net.weights.size() != static_cast<size_t>(net.nprime))
    throw ValidationError("predict: network has no trained weights");
  if (tsw.size() != net.num_switches || x.size() != net.state_dim)
    throw ValidationError("predict: argument dimensions do not match the network");
  return net.weights[static_cast<size_t>(khat)].transpose() * net.basis.eval(tsw, x);
}

void sample_tuple(const SwitchedTrackingProblem& p, std::mt19937_64& rng, Vec& tsw, Vec& x) {
  const int K = p.num_switches();
  const int n = p.state_dim();
  const double margin = p.switch_margin();
  const double lo = p.t0 + margin;
  const double hi = p.tf - margin;
  tsw.resize(K);
  if (K == 1) {
    tsw(0) = uniform(rng, lo, hi);
  } else if (K > 1) {
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      for (int j = 0; j < K; ++j) tsw(j) = uniform(rng, lo, hi);
      std::sort(tsw.data(), tsw.data() + K);
      ok = true;
      for (int j = 1; j < K; ++j) ok = ok && (tsw(j) - tsw(j - 1) >= margin);
    }
    if (!ok)
      throw NumericalError("could not sample ordered switch times with the requested margin");
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x(i) = uniform(rng, p.omega.state_lo(i), p.omega.state_hi(i));
}

SampleBatch sample_batch(const TrainConfig& cfg, const SwitchedTrackingProblem& p,
                         std::mt19937_64& rng) {
  SampleBatch batch;
  batch.tsw.resize(cfg.eta, p.num_switches());
  batch.x.resize(cfg.eta, p.state_dim());
  Vec tsw, x;
  for (int l = 0; l < cfg.eta; ++l) {
    sample_tuple(p, rng, tsw, x);
    batch.tsw.row(l) = tsw.transpose();
    batch.x.row(l) = x.transpose();
  }
  return batch;
}

std::optional<Vec> costate_target(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                                  const PolynomialBasis& basis, long khat, const Mat& W_current,
                                  const Mat* W_next, const Vec& tsw, const Vec& x,
                                  const Mat& Rbar_inv, const ReferenceEvaluator& ref) {
  SwitchVector sw;
  sw.times.assign(tsw.data(), tsw.data() + tsw.size());

  Vec feat = basis.eval(tsw, x);
  Vec lam_next = W_current.transpose() * feat;
  int v = active_mode(p, grid, khat);
  Vec u = -(Rbar_inv * (mode_input_map(p, v, x).transpose() * lam_next));
  Vec xp = discrete_step(p, grid, sw, khat, x, u);
  if (!xp.allFinite()) return std::nullopt;

  double t_next = map_time(p.t0, p.tf, sw, grid.that_at(khat + 1));
  Vec r_next = ref(t_next);

  Vec target;
  if (khat == grid.nprime - 1) {
    target = p.terminal_factor * (p.cost.S * (xp - r_next));
  } else {
    int j2 = active_segment(grid, khat + 1);
    double h2 = segment_scale(p.t0, p.tf, sw, j2) * grid.dthat;
    Vec feat2 = basis.eval(tsw, xp);
    Vec lam_nn = W_next->transpose() * feat2;  // costate at khat+2 from x_{khat+1}
    int v2 = p.sequence[static_cast<size_t>(j2)];
    Vec u2 = -(Rbar_inv * (mode_input_map(p, v2, xp).transpose() * lam_nn));
    Mat J2 = step_jacobian(p, grid, sw, khat + 1, xp, u2);
    target = p.cost.Qbar * (xp - r_next) * h2 + J2.transpose() * lam_nn;
  }
  if (!target.allFinite()) return std::nullopt;
  return target;
}

std::optional<Vec> costate_target(const CostateNetwork& net, const SwitchedTrackingProblem& p,
                                  const TransformedGrid& grid, long khat, const Vec& tsw,
                                  const Vec& x) {
  if (khat < 0 || khat >= grid.nprime) throw ValidationError("costate_target: bad step index");
  Mat Rbar_inv = p.cost.Rbar.llt().solve(Mat::Identity(p.input_dim(), p.input_dim()));
  const Mat& Wcur = net.weights.at(static_cast<size_t>(khat));
  const Mat* Wnext =
      khat + 1 < grid.nprime ? &net.weights.at(static_cast<size_t>(khat + 1)) : nullptr;
  ReferenceEvaluator ref(p);
  return costate_target(p, grid, net.basis, khat, Wcur, Wnext, tsw, x, Rbar_inv, ref);
}

Mat least_squares_fit(const Mat& phi, const Mat& targets, double ridge) {
  if (phi.rows() != targets.rows())
    throw ValidationError("least_squares_fit: row count mismatch");
  if (phi.rows() < phi.cols())
    throw ValidationError("fit underdetermined: fewer samples than basis functions (" +
                          std::to_string(phi.rows()) + " < " + std::to_string(phi.cols()) + ")");
  if (ridge < 0) throw ValidationError("least_squares_fit: negative ridge");

  if (ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Mat> qr(phi);
    if (qr.rank() < phi.cols())
      throw NumericalError(
          "rank-deficient basis matrix (rank " + std::to_string(qr.rank()) + " of " +
          std::to_string(phi.cols()) + "); add samples or set ridge > 0");
    return qr.solve(targets);
  }
  // Exact ridge solution via QR of the stacked system [phi; sqrt(ridge) I].
  const long m = phi.cols();
  Mat stacked(phi.rows() + m, m);
  stacked.topRows(phi.rows()) = phi;
  stacked.bottomRows(m) = std::sqrt(ridge) * Mat::Identity(m, m);
  Mat rhs = Mat::Zero(stacked.rows(), targets.cols());
  rhs.topRows(targets.rows()) = targets;
  return Eigen::HouseholderQR<Mat>(stacked).solve(rhs);
}

namespace {

double rms_residual(const Mat& phi, const Mat& W, const Mat& targets,
                    const std::vector<std::uint8_t>& ok) {
  double sum = 0.0;
  long count = 0;
  for (long l = 0; l < phi.rows(); ++l) {
    if (!ok[static_cast<size_t>(l)]) continue;
    sum += (phi.row(l) * W - targets.row(l)).squaredNorm();
    ++count;
  }
  return count == 0 ? 0.0 : std::sqrt(sum / static_cast<double>(count * targets.cols()));
}

}  // namespace

TrainResult train(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const TrainConfig& cfg, const ExecPolicy& exec) {
  auto t_start = std::chrono::steady_clock::now();
  validate_or_throw(p);
  if (grid.num_switches != p.num_switches())
    throw ValidationError("grid switch count does not match the mode sequence");
  if (p.reference.per_mode())
    throw ValidationError("training requires a global reference (per-mode references are rollout-only)");

  const int n = p.state_dim();
  const int K = p.num_switches();
  PolynomialBasis basis = PolynomialBasis::enumerate(K + n, cfg.basis_degree);
  if (cfg.eta < basis.size())
    throw ValidationError("fit underdetermined: eta (" + std::to_string(cfg.eta) +
                          ") is below the basis size (" + std::to_string(basis.size()) + ")");
  if (cfg.max_inner < 1) throw ValidationError("max_inner must be positive");

  Mat Rbar_inv = p.cost.Rbar.llt().solve(Mat::Identity(p.input_dim(), p.input_dim()));
  ReferenceEvaluator ref(p);
  const double ridge = cfg.effective_ridge();

  TrainResult result;
  CostateNetwork& net = result.net;
  net.basis = basis;
  net.state_dim = n;
  net.input_dim = p.input_dim();
  net.num_switches = K;
  net.nprime = grid.nprime;
  net.dthat = grid.dthat;
  net.terminal_factor = p.terminal_factor;
  net.seed = cfg.seed;
  net.state_lo = p.omega.state_lo;
  net.state_hi = p.omega.state_hi;
  net.switch_margin = p.switch_margin();
  net.weights.assign(static_cast<size_t>(grid.nprime), Mat::Zero(basis.size(), n));

  TrainReport& report = result.report;
  report.steps.resize(static_cast<size_t>(grid.nprime));

  Mat phi(cfg.eta, basis.size());
  Mat targets(cfg.eta, n);
  std::vector<std::uint8_t> ok(static_cast<size_t>(cfg.eta), 1);
  SampleBatch batch;

  for (long khat = grid.nprime - 1; khat >= 0; --khat) {
    StepTrainRecord& rec = report.steps[static_cast<size_t>(khat)];
    rec.khat = khat;
    Mat Wcur = Mat::Zero(basis.size(), n);
    const Mat* Wnext =
        khat + 1 < grid.nprime ? &net.weights[static_cast<size_t>(khat + 1)] : nullptr;

    int grow_streak = 0;
    for (int iter = 0; iter < cfg.max_inner; ++iter) {
      if (cfg.resample || iter == 0) {
        std::mt19937_64 rng =
            seeded_engine(cfg.seed, {0xb47c5u, static_cast<std::uint64_t>(khat),
                                     static_cast<std::uint64_t>(cfg.resample ? iter : 0)});
        batch = sample_batch(cfg, p, rng);
      }
      std::fill(ok.begin(), ok.end(), 1);
      kernels::target_batch(p, grid, basis, khat, Wcur, Wnext, batch.tsw, batch.x, Rbar_inv,
                            ref, targets, ok, exec);
      // Deterministic per-slot resampling of non-finite propagations.
      for (int l = 0; l < cfg.eta; ++l) {
        int attempt = 0;
        while (!ok[static_cast<size_t>(l)]) {
          if (++attempt > 10)
            throw NumericalError("sample slot " + std::to_string(l) + " at step " +
                                 std::to_string(khat) +
                                 " stayed non-finite after 10 resampling attempts");
          ++rec.discarded;
          std::mt19937_64 slot_rng = seeded_engine(
              cfg.seed, {0x5107u, static_cast<std::uint64_t>(khat),
                         static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(l),
                         static_cast<std::uint64_t>(attempt)});
          Vec tsw, x;
          sample_tuple(p, slot_rng, tsw, x);
          auto t = costate_target(p, grid, basis, khat, Wcur, Wnext, tsw, x, Rbar_inv, ref);
          if (t) {
            batch.tsw.row(l) = tsw.transpose();
            batch.x.row(l) = x.transpose();
            targets.row(l) = t->transpose();
            ok[static_cast<size_t>(l)] = 1;
          }
        }
      }
      kernels::basis_matrix(basis, batch.tsw, batch.x, phi, exec);

      Mat Wnew = least_squares_fit(phi, targets, ridge);
      double change = (Wnew - Wcur).norm();
      double resid = rms_residual(phi, Wnew, targets, ok);
      rec.change_norms.push_back(change);
      rec.residual_rms.push_back(resid);
      ++report.total_inner_iterations;
      Wcur = std::move(Wnew);

      if (change <= cfg.gamma * (1.0 + Wcur.norm())) break;
      if (iter + 1 == cfg.max_inner) {
        rec.capped = true;
        ++report.capped_steps;
      }
      size_t it = rec.residual_rms.size();
      if (it >= 2 && rec.residual_rms[it - 1] > rec.residual_rms[it - 2])
        ++grow_streak;
      else
        grow_streak = 0;
      if (grow_streak >= 5 &&
          rec.residual_rms[it - 1] >= 2.0 * rec.residual_rms[it - 6])
        throw NumericalError("training diverged at step " + std::to_string(khat) +
                             ": residual grew over 5 consecutive iterations");
    }
    report.discarded_samples += rec.discarded;
    net.weights[static_cast<size_t>(khat)] = std::move(Wcur);
  }

  report.step_weight_norms.resize(static_cast<size_t>(grid.nprime));
  report.step_weight_jumps.assign(static_cast<size_t>(grid.nprime), 0.0);
  for (long k = 0; k < grid.nprime; ++k) {
    report.step_weight_norms[static_cast<size_t>(k)] = net.weights[static_cast<size_t>(k)].norm();
    if (k > 0)
      report.step_weight_jumps[static_cast<size_t>(k)] =
          (net.weights[static_cast<size_t>(k)] - net.weights[static_cast<size_t>(k - 1)]).norm();
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace switchtrack
