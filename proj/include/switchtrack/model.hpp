#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "switchtrack/common.hpp"

namespace switchtrack {

// One subsystem in control-affine form xdot = drift(x) + input_map(x) u.
// Every mode must vanish at the origin (drift(0) == 0) so the tracking
// transcription below stays well posed.
struct ModeDynamics {
  enum class Kind { Linear, VanDerPol, Custom };

  Kind kind = Kind::Linear;
  Mat A;  // Linear only
  Mat B;  // Linear only

  // Custom only; jacobians optional (finite differences fill in).
  std::function<Vec(const Vec&)> drift_fn;
  std::function<Mat(const Vec&)> input_map_fn;
  std::function<Mat(const Vec&)> drift_jacobian_fn;
  // d/dx of (input_map(x) u) for fixed u.
  std::function<Mat(const Vec&, const Vec&)> input_jacobian_fn;

  static ModeDynamics linear(Mat A, Mat B);
  static ModeDynamics vanderpol();
  static ModeDynamics custom(int n, int m,
                             std::function<Vec(const Vec&)> drift,
                             std::function<Mat(const Vec&)> input_map,
                             std::function<Mat(const Vec&)> drift_jacobian = nullptr,
                             std::function<Mat(const Vec&, const Vec&)> input_jacobian = nullptr);

  int state_dim = 0;
  int input_dim = 0;
};

// Reference generator r(t). Sinusoid/constant kinds have closed forms; the
// ODE kinds are integrated by explicit Euler on whatever grid the caller
// walks. With one derivative per mode the active derivative follows the mode
// sequence.
struct ReferenceModel {
  enum class Kind { Sinusoid, Constant, CustomOde };

  Kind kind = Kind::Sinusoid;
  Vec r0;
  // CustomOde: size 1 = one global derivative, size M = one per mode.
  std::vector<std::function<Vec(double)>> derivs;

  static ReferenceModel sinusoid(Vec r0);
  static ReferenceModel constant(Vec r0);
  static ReferenceModel custom_ode(Vec r0, std::function<Vec(double)> deriv);
  static ReferenceModel custom_ode_per_mode(Vec r0, std::vector<std::function<Vec(double)>> derivs);

  bool closed_form() const { return kind != Kind::CustomOde; }
  bool per_mode() const { return kind == Kind::CustomOde && derivs.size() > 1; }
};

struct CostSpec {
  Mat S;     // terminal weight, symmetric psd
  Mat Qbar;  // stage state weight, symmetric psd
  Mat Rbar;  // stage control weight, symmetric pd
};

// Axis-aligned training domain: a state box plus how close switching times
// may get to the horizon ends (and to each other).
struct SamplingDomain {
  Vec state_lo;
  Vec state_hi;
  double switch_margin = 0.0;  // 0 = use the 1e-3*(tf-t0) default

  double diameter() const { return (state_hi - state_lo).norm(); }
};

struct SwitchedTrackingProblem {
  std::vector<ModeDynamics> modes;
  std::vector<int> sequence;  // 0-based mode index per segment
  double t0 = 0.0;
  double tf = 1.0;
  CostSpec cost;
  ReferenceModel reference;
  SamplingDomain omega;
  double terminal_factor = 1.0;  // weight on S in the terminal costate (1 or 2)

  int state_dim() const { return modes.empty() ? 0 : modes.front().state_dim; }
  int input_dim() const { return modes.empty() ? 0 : modes.front().input_dim; }
  int num_switches() const { return static_cast<int>(sequence.size()) - 1; }
  double switch_margin() const {
    return omega.switch_margin > 0 ? omega.switch_margin : 1e-3 * (tf - t0);
  }
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
  std::string first_failure() const;
};

// Checks every structural invariant (dimensions, symmetry/definiteness,
// horizon ordering, origin condition, finite entries, sequence range).
ValidationReport validate_problem(const SwitchedTrackingProblem& p,
                                  std::uint64_t sample_seed = 0x5eedu);
void validate_or_throw(const SwitchedTrackingProblem& p);

Vec mode_drift(const SwitchedTrackingProblem& p, int v, const Vec& x);
Mat mode_input_map(const SwitchedTrackingProblem& p, int v, const Vec& x);
// drift(x) + input_map(x) u for mode v.
Vec eval_mode(const SwitchedTrackingProblem& p, int v, const Vec& x, const Vec& u);
// (d drift/dx, d(input_map u)/dx); analytic for built-ins, central
// differences (h_i = 1e-5 * max(1,|x_i|)) for custom modes without jacobians.
std::pair<Mat, Mat> mode_jacobians(const SwitchedTrackingProblem& p, int v,
                                   const Vec& x, const Vec& u);

// r(t) for problems with a single (global) reference. Closed-form kinds are
// exact; a global custom ODE is Euler-integrated from t0 with `ode_steps`
// steps. Per-mode references need switch times; see rollout's reference_track.
Vec reference_at(const SwitchedTrackingProblem& p, double t, long ode_steps = 200000);

// O(1) reference lookups for one problem: closed forms evaluate exactly, a
// global custom ODE is integrated once onto a fine uniform grid and linearly
// interpolated. Per-mode references are rejected (they depend on the switch
// vector; use rollout's reference_track for those).
class ReferenceEvaluator {
public:
  explicit ReferenceEvaluator(const SwitchedTrackingProblem& p, long table_steps = 200000);
  Vec operator()(double t) const;

private:
  const SwitchedTrackingProblem* p_;
  bool closed_form_ = true;
  double t0_ = 0.0, tf_ = 1.0;
  Mat table_;  // (table_steps+1) x n when tabulated
};

}  // namespace switchtrack
