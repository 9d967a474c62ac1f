#pragma once

#include <vector>

#include "switchtrack/model.hpp"

namespace switchtrack {

// Strictly increasing switching instants inside the open horizon.
struct SwitchVector {
  std::vector<double> times;

  int count() const { return static_cast<int>(times.size()); }
  static SwitchVector checked(std::vector<double> times, double t0, double tf,
                              double min_gap = 0.0);
};

// Uniform grid on the scaled horizon [0, K+1]. Each unit interval [j, j+1]
// carries one segment of the mode sequence; switching always happens at the
// integer grid nodes. The requested step is snapped to the nearest value
// that makes both the per-segment step count and the total step count whole.
struct TransformedGrid {
  int num_switches = 0;      // K
  double dthat = 0.0;        // scaled-time step actually used
  long steps_per_segment = 0;
  long nprime = 0;           // total steps across the horizon
  bool adjusted = false;     // true when dthat was snapped

  static TransformedGrid make(int num_switches, double dthat_requested);
  double that_at(long khat) const { return static_cast<double>(khat) * dthat; }
};

// Piecewise-affine map from scaled time in [0, K+1] to physical time in
// [t0, tf]; segment j covers [t_j, t_{j+1}] with t_0 = t0 and t_{K+1} = tf.
double map_time(double t0, double tf, const SwitchVector& sw, double that);

// Physical length t_{j+1} - t_j of segment j (0-based, j in [0, K]).
double segment_scale(double t0, double tf, const SwitchVector& sw, int j);

// Segment owning step khat; step nprime (the terminal node) belongs to the
// last segment.
int active_segment(const TransformedGrid& grid, long khat);
int active_mode(const SwitchedTrackingProblem& p, const TransformedGrid& grid, long khat);

// One explicit Euler step of the scaled dynamics:
// x + (drift(x) + input_map(x) u) * sigma_j * dthat.
Vec discrete_step(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u);

// d(next state)/d(state) of discrete_step with u held fixed:
// I + (d drift/dx + d(input_map u)/dx) * sigma_j * dthat.
Mat step_jacobian(const SwitchedTrackingProblem& p, const TransformedGrid& grid,
                  const SwitchVector& sw, long khat, const Vec& x, const Vec& u);

}  // namespace switchtrack
