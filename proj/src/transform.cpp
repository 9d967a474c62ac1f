#include "switchtrack/transform.hpp"

#include <cmath>
#include <string>

namespace switchtrack {

SwitchVector SwitchVector::checked(std::vector<double> times, double t0, double tf,
                                   double min_gap) {
  double prev = t0;
  for (size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j]))
      throw ValidationError("switch time " + std::to_string(j + 1) + " is not finite");
    if (times[j] <= prev + min_gap || times[j] >= tf - min_gap)
      throw ValidationError("switch times must satisfy t0 < t_1 < ... < t_K < tf (violated at t_" +
                            std::to_string(j + 1) + " = " + format_full(times[j]) + ")");
    prev = times[j];
  }
  SwitchVector sw;
  sw.times = std::move(times);
  return sw;
}

TransformedGrid TransformedGrid::make(int num_switches, double dthat_requested) {
  if (num_switches < 0) throw ValidationError("negative switch count");
  if (!(dthat_requested > 0) || dthat_requested > 1.0)
    throw ValidationError("dthat must lie in (0, 1]");
  TransformedGrid g;
  g.num_switches = num_switches;
  double per_seg = 1.0 / dthat_requested;
  g.steps_per_segment = std::max(1L, std::lround(per_seg));
  g.dthat = 1.0 / static_cast<double>(g.steps_per_segment);
  g.nprime = g.steps_per_segment * static_cast<long>(num_switches + 1);
  g.adjusted = std::abs(per_seg - static_cast<double>(g.steps_per_segment)) > 1e-9 * per_seg;
  return g;
}

double map_time(double t0, double tf, const SwitchVector& sw, double that) {
  const int K = sw.count();
  if (that < 0.0 || that > static_cast<double>(K + 1))
    throw ValidationError("scaled time " + format_full(that) + " outside [0, K+1]");
  int j = std::min(static_cast<int>(std::floor(that)), K);
  double left = (j == 0) ? t0 : sw.times[static_cast<size_t>(j - 1)];
  double right = (j == K) ? tf : sw.times[static_cast<size_t>(j)];
  return left + (that - static_cast<double>(j)) * (right - left);
}

double segment_scale(double t0, double tf, const SwitchVector& sw, int j) {
  const int K = sw.count();
  if (j < 0 || j > K) throw ValidationError("segment index out of range");
  double left = (j == 0) ? t0 : sw.times[static_cast<size_t>(j - 1)];
  double right = (j == K) ? tf : sw.times[static_cast<size_t>(j)];
  return right - left;
}

int active_segment(const TransformedGrid& grid, long khat) {
  if (khat < 0 || khat > grid.nprime)
    throw ValidationError("step index " + std::to_string(khat) + " outside [0, N']");
  long j = khat / grid.steps_per_segment;
  if (j > grid.num_switches) j = grid.num_switches;  // terminal node
  return static_cast<int>(j);
}

int active_mode(const SwitchedTrackingProblem& p, const TransformedGrid& grid, long khat) {
  return p.sequence.at(static_cast<size_t>(active_segment(grid, khat)));
}

namespace {

void require_matching(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                      const SwitchVector& sw) {
  if (grid.num_switches != p.num_switches() || sw.count() != p.num_switches())
    throw ValidationError("grid/switch vector disagree with the mode sequence length");
}

}  // namespace

Vec discrete_step(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u) {
  require_matching(p, grid, sw);
  int j = active_segment(grid, khat);
  double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
  return x + eval_mode(p, p.sequence[static_cast<size_t>(j)], x, u) * h;
}

Mat step_jacobian(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u) {
  require_matching(p, grid, sw);
  int j = active_segment(grid, khat);
  double h = segment_scale(p.t0, p.tf, sw, j) * grid.dthat;
  auto [Jf, Jg] = mode_jacobians(p, p.sequence[static_cast<size_t>(j)], x, u);
  const int n = p.state_dim();
  return Mat::Identity(n, n) + (Jf + Jg) * h;
}

}  // namespace switchtrack
