#pragma once

#include <random>

#include "switchtrack/model.hpp"

namespace testutil {

using switchtrack::Mat;
using switchtrack::Vec;

inline Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Mat col2(double a, double b) {
  Mat m(2, 1);
  m << a, b;
  return m;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Two gently damped, mildly differing linear modes; mirrors the bundled
// two-mode tracking config so in-process tests and CLI tests agree.
inline switchtrack::SwitchedTrackingProblem lq_two_mode() {
  switchtrack::SwitchedTrackingProblem p;
  p.modes = {switchtrack::ModeDynamics::linear(mat2(-0.2, 0.3, 0.0, -0.1), col2(0.0, 1.0)),
             switchtrack::ModeDynamics::linear(mat2(-0.175, 0.275, 0.05, -0.15),
                                               col2(0.05, 0.95))};
  p.sequence = {0, 1};
  p.t0 = 0.0;
  p.tf = 1.0;
  p.cost.S = mat2(0.4, 0.0, 0.0, 0.2);
  p.cost.Qbar = mat2(0.3, 0.0, 0.0, 0.1);
  p.cost.Rbar = Mat::Constant(1, 1, 2.0);
  p.reference = switchtrack::ReferenceModel::constant(vec2(0.5, -0.25));
  p.omega.state_lo = vec2(-2.0, -2.0);
  p.omega.state_hi = vec2(2.0, 2.0);
  p.omega.switch_margin = 0.2;
  return p;
}

// Single stable linear mode, no switches; the costate map is exactly affine
// so a degree >= 1 basis can represent it and fits should be near-exact.
inline switchtrack::SwitchedTrackingProblem lq_single_mode() {
  switchtrack::SwitchedTrackingProblem p;
  p.modes = {switchtrack::ModeDynamics::linear(mat2(-0.3, 0.2, 0.0, -0.4), col2(0.0, 1.0))};
  p.sequence = {0};
  p.t0 = 0.0;
  p.tf = 1.0;
  p.cost.S = mat2(0.5, 0.0, 0.0, 0.5);
  p.cost.Qbar = mat2(0.2, 0.0, 0.0, 0.3);
  p.cost.Rbar = Mat::Constant(1, 1, 1.5);
  p.reference = switchtrack::ReferenceModel::constant(vec2(0.25, -0.5));
  p.omega.state_lo = vec2(-2.0, -2.0);
  p.omega.state_hi = vec2(2.0, 2.0);
  return p;
}

// The bundled oscillator-plus-linear benchmark, constructed directly so unit
// tests do not depend on the config directory.
inline switchtrack::SwitchedTrackingProblem vdp_benchmark() {
  switchtrack::SwitchedTrackingProblem p;
  p.modes = {switchtrack::ModeDynamics::vanderpol(),
             switchtrack::ModeDynamics::linear(mat2(0.0, 1.0, 2.0, -1.0), col2(0.0, 1.0))};
  p.sequence = {0, 1};
  p.t0 = 0.0;
  p.tf = 3.0;
  p.cost.S = mat2(1e5, 0.0, 0.0, 1e5);
  p.cost.Qbar = mat2(1e5, 0.0, 0.0, 1e7);
  p.cost.Rbar = Mat::Constant(1, 1, 1000.0);
  p.reference = switchtrack::ReferenceModel::sinusoid(vec2(0.0, 0.0));
  p.omega.state_lo = vec2(-4.0, -4.0);
  p.omega.state_hi = vec2(4.0, 4.0);
  p.omega.switch_margin = 0.003;
  return p;
}

inline double rand_in(std::mt19937_64& rng, double lo, double hi) {
  return switchtrack::uniform(rng, lo, hi);
}

inline Vec rand_state(std::mt19937_64& rng, const switchtrack::SwitchedTrackingProblem& p) {
  Vec x(p.state_dim());
  for (int c = 0; c < x.size(); ++c)
    x(c) = switchtrack::uniform(rng, p.omega.state_lo(c), p.omega.state_hi(c));
  return x;
}

}  // namespace testutil
