#include "switchtrack/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace switchtrack {

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

ModeDynamics ModeDynamics::linear(Mat A, Mat B) {
  ModeDynamics m;
  m.kind = Kind::Linear;
  m.state_dim = static_cast<int>(A.rows());
  m.input_dim = static_cast<int>(B.cols());
  m.A = std::move(A);
  m.B = std::move(B);
  return m;
}

ModeDynamics ModeDynamics::vanderpol() {
  ModeDynamics m;
  m.kind = Kind::VanDerPol;
  m.state_dim = 2;
  m.input_dim = 1;
  return m;
}

ModeDynamics ModeDynamics::custom(int n, int m,
                                  std::function<Vec(const Vec&)> drift,
                                  std::function<Mat(const Vec&)> input_map,
                                  std::function<Mat(const Vec&)> drift_jacobian,
                                  std::function<Mat(const Vec&, const Vec&)> input_jacobian) {
  ModeDynamics d;
  d.kind = Kind::Custom;
  d.state_dim = n;
  d.input_dim = m;
  d.drift_fn = std::move(drift);
  d.input_map_fn = std::move(input_map);
  d.drift_jacobian_fn = std::move(drift_jacobian);
  d.input_jacobian_fn = std::move(input_jacobian);
  return d;
}

ReferenceModel ReferenceModel::sinusoid(Vec r0) {
  if (r0.size() != 2) throw ValidationError("sinusoid reference needs a 2-state r0");
  ReferenceModel r;
  r.kind = Kind::Sinusoid;
  r.r0 = std::move(r0);
  return r;
}

ReferenceModel ReferenceModel::constant(Vec r0) {
  ReferenceModel r;
  r.kind = Kind::Constant;
  r.r0 = std::move(r0);
  return r;
}

ReferenceModel ReferenceModel::custom_ode(Vec r0, std::function<Vec(double)> deriv) {
  ReferenceModel r;
  r.kind = Kind::CustomOde;
  r.r0 = std::move(r0);
  r.derivs.push_back(std::move(deriv));
  return r;
}

ReferenceModel ReferenceModel::custom_ode_per_mode(Vec r0,
                                                   std::vector<std::function<Vec(double)>> derivs) {
  if (derivs.empty()) throw ValidationError("per-mode reference needs at least one derivative");
  ReferenceModel r;
  r.kind = Kind::CustomOde;
  r.r0 = std::move(r0);
  r.derivs = std::move(derivs);
  return r;
}

bool ValidationReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string ValidationReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return c.name + ": " + c.detail;
  return {};
}

namespace {

bool finite(const Mat& m) { return m.allFinite(); }

bool symmetric(const Mat& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Smallest eigenvalue of a symmetric matrix; the psd/pd checks below compare
// it against a scale-relative floor.
double min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.eigenvalues().minCoeff();
}

void check(ValidationReport& rep, const std::string& name, bool pass,
           const std::string& detail = {}) {
  rep.checks.push_back({name, pass, detail});
}

}  // namespace

Vec mode_drift(const SwitchedTrackingProblem& p, int v, const Vec& x) {
  const ModeDynamics& m = p.modes.at(static_cast<size_t>(v));
  switch (m.kind) {
    case ModeDynamics::Kind::Linear:
      return m.A * x;
    case ModeDynamics::Kind::VanDerPol: {
      Vec f(2);
      f(0) = x(1);
      f(1) = (1.0 - x(0) * x(0)) * x(1) - x(0);
      return f;
    }
    case ModeDynamics::Kind::Custom:
      return m.drift_fn(x);
  }
  throw NumericalError("unreachable mode kind");
}

Mat mode_input_map(const SwitchedTrackingProblem& p, int v, const Vec& x) {
  const ModeDynamics& m = p.modes.at(static_cast<size_t>(v));
  switch (m.kind) {
    case ModeDynamics::Kind::Linear:
      return m.B;
    case ModeDynamics::Kind::VanDerPol: {
      Mat g(2, 1);
      g << 0.0, 1.0;
      return g;
    }
    case ModeDynamics::Kind::Custom:
      return m.input_map_fn(x);
  }
  throw NumericalError("unreachable mode kind");
}

Vec eval_mode(const SwitchedTrackingProblem& p, int v, const Vec& x, const Vec& u) {
  return mode_drift(p, v, x) + mode_input_map(p, v, x) * u;
}

std::pair<Mat, Mat> mode_jacobians(const SwitchedTrackingProblem& p, int v,
                                   const Vec& x, const Vec& u) {
  const ModeDynamics& m = p.modes.at(static_cast<size_t>(v));
  const int n = m.state_dim;
  switch (m.kind) {
    case ModeDynamics::Kind::Linear:
      return {m.A, Mat::Zero(n, n)};
    case ModeDynamics::Kind::VanDerPol: {
      Mat J(2, 2);
      J << 0.0, 1.0,
          -2.0 * x(0) * x(1) - 1.0, 1.0 - x(0) * x(0);
      return {J, Mat::Zero(2, 2)};
    }
    case ModeDynamics::Kind::Custom:
      break;
  }
  Mat Jf(n, n), Jg(n, n);
  if (m.drift_jacobian_fn) {
    Jf = m.drift_jacobian_fn(x);
  } else {
    for (int i = 0; i < n; ++i) {
      double h = 1e-5 * std::max(1.0, std::abs(x(i)));
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      Jf.col(i) = (m.drift_fn(xp) - m.drift_fn(xm)) / (2.0 * h);
    }
  }
  if (m.input_jacobian_fn) {
    Jg = m.input_jacobian_fn(x, u);
  } else {
    for (int i = 0; i < n; ++i) {
      double h = 1e-5 * std::max(1.0, std::abs(x(i)));
      Vec xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      Jg.col(i) = (m.input_map_fn(xp) * u - m.input_map_fn(xm) * u) / (2.0 * h);
    }
  }
  return {Jf, Jg};
}

Vec reference_at(const SwitchedTrackingProblem& p, double t, long ode_steps) {
  const ReferenceModel& r = p.reference;
  switch (r.kind) {
    case ReferenceModel::Kind::Sinusoid: {
      Vec out(2);
      out(0) = r.r0(0) + (1.0 - std::cos(M_PI * t)) / M_PI;
      out(1) = r.r0(1) + std::sin(M_PI * t);
      return out;
    }
    case ReferenceModel::Kind::Constant:
      return r.r0;
    case ReferenceModel::Kind::CustomOde:
      break;
  }
  if (r.per_mode())
    throw ValidationError("per-mode reference needs switch times; use reference_track");
  Vec out = r.r0;
  if (t == p.t0) return out;
  double h = (t - p.t0) / static_cast<double>(ode_steps);
  double tk = p.t0;
  for (long k = 0; k < ode_steps; ++k) {
    out += r.derivs[0](tk) * h;
    tk = p.t0 + (t - p.t0) * static_cast<double>(k + 1) / static_cast<double>(ode_steps);
  }
  return out;
}

ReferenceEvaluator::ReferenceEvaluator(const SwitchedTrackingProblem& p, long table_steps)
    : p_(&p), t0_(p.t0), tf_(p.tf) {
  if (p.reference.closed_form()) return;
  if (p.reference.per_mode())
    throw ValidationError("per-mode reference cannot be tabulated without switch times");
  closed_form_ = false;
  const int n = static_cast<int>(p.reference.r0.size());
  table_.resize(table_steps + 1, n);
  table_.row(0) = p.reference.r0.transpose();
  double h = (tf_ - t0_) / static_cast<double>(table_steps);
  Vec r = p.reference.r0;
  for (long k = 0; k < table_steps; ++k) {
    r += p.reference.derivs[0](t0_ + static_cast<double>(k) * h) * h;
    table_.row(k + 1) = r.transpose();
  }
}

Vec ReferenceEvaluator::operator()(double t) const {
  if (closed_form_) return reference_at(*p_, t);
  double pos = (t - t0_) / (tf_ - t0_) * static_cast<double>(table_.rows() - 1);
  long k = std::max(0L, std::min(static_cast<long>(table_.rows()) - 2, static_cast<long>(pos)));
  double w = pos - static_cast<double>(k);
  return (table_.row(k) * (1.0 - w) + table_.row(k + 1) * w).transpose();
}

ValidationReport validate_problem(const SwitchedTrackingProblem& p, std::uint64_t sample_seed) {
  ValidationReport rep;
  const int n = p.state_dim();
  const int m = p.input_dim();

  check(rep, "modes_present", !p.modes.empty(), "at least one mode required");
  check(rep, "sequence_present", !p.sequence.empty(), "mode sequence must be nonempty");
  if (p.modes.empty() || p.sequence.empty()) return rep;

  bool dims_ok = n > 0 && m > 0;
  for (const auto& mode : p.modes)
    dims_ok = dims_ok && mode.state_dim == n && mode.input_dim == m;
  check(rep, "mode_dimensions_consistent", dims_ok,
        "all modes must share state/input dimensions");

  bool seq_ok = true;
  for (int v : p.sequence) seq_ok = seq_ok && v >= 0 && v < static_cast<int>(p.modes.size());
  check(rep, "sequence_in_range", seq_ok, "sequence entries must index a declared mode");

  check(rep, "horizon_ordered", p.tf > p.t0, "tf must exceed t0");

  bool lin_finite = true;
  for (const auto& mode : p.modes)
    if (mode.kind == ModeDynamics::Kind::Linear)
      lin_finite = lin_finite && finite(mode.A) && finite(mode.B);
  check(rep, "mode_matrices_finite", lin_finite, "non-finite entry in a mode matrix");

  bool cost_dims = p.cost.S.rows() == n && p.cost.S.cols() == n &&
                   p.cost.Qbar.rows() == n && p.cost.Qbar.cols() == n &&
                   p.cost.Rbar.rows() == m && p.cost.Rbar.cols() == m;
  check(rep, "cost_dimensions", cost_dims, "S/Qbar must be n x n, Rbar m x m");
  if (cost_dims) {
    bool cfin = finite(p.cost.S) && finite(p.cost.Qbar) && finite(p.cost.Rbar);
    check(rep, "cost_matrices_finite", cfin, "non-finite entry in a cost matrix");
    double s_scale = std::max(1.0, p.cost.S.cwiseAbs().maxCoeff());
    double q_scale = std::max(1.0, p.cost.Qbar.cwiseAbs().maxCoeff());
    check(rep, "S_symmetric_psd",
          symmetric(p.cost.S) && min_eig(p.cost.S) >= -1e-10 * s_scale);
    check(rep, "Qbar_symmetric_psd",
          symmetric(p.cost.Qbar) && min_eig(p.cost.Qbar) >= -1e-10 * q_scale);
    check(rep, "Rbar_symmetric_pd", symmetric(p.cost.Rbar) && min_eig(p.cost.Rbar) > 0.0);
  }

  bool ref_dim = p.reference.r0.size() == n;
  check(rep, "reference_dimension", ref_dim, "r0 must have state dimension");
  if (p.reference.per_mode())
    check(rep, "reference_per_mode_count",
          p.reference.derivs.size() == p.modes.size(),
          "per-mode reference needs one derivative per mode");

  bool box_ok = p.omega.state_lo.size() == n && p.omega.state_hi.size() == n &&
                ((p.omega.state_hi - p.omega.state_lo).array() > 0).all();
  check(rep, "sampling_box_valid", box_ok, "omega box must be nonempty with lo < hi");

  check(rep, "switch_margin_valid",
        p.switch_margin() > 0 &&
            p.switch_margin() * static_cast<double>(p.sequence.size()) < (p.tf - p.t0),
        "switch margin must leave room for every segment");

  check(rep, "terminal_factor_valid",
        p.terminal_factor == 1.0 || p.terminal_factor == 2.0,
        "terminal costate factor must be 1 or 2");

  // Origin condition drift(0) == 0, plus finiteness of drift/input map on a
  // few sampled points for custom modes.
  if (dims_ok && seq_ok) {
    bool origin_ok = true;
    bool eval_ok = true;
    std::string origin_detail;
    std::mt19937_64 rng = seeded_engine(sample_seed);
    for (size_t v = 0; v < p.modes.size(); ++v) {
      Vec f0 = mode_drift(p, static_cast<int>(v), Vec::Zero(n));
      if (!f0.allFinite() || f0.cwiseAbs().maxCoeff() > 1e-12) {
        origin_ok = false;
        origin_detail = "mode " + std::to_string(v + 1) + " has drift(0) != 0";
      }
      for (int trial = 0; trial < 8 && box_ok; ++trial) {
        Vec x(n);
        for (int i = 0; i < n; ++i)
          x(i) = uniform(rng, p.omega.state_lo(i), p.omega.state_hi(i));
        eval_ok = eval_ok && mode_drift(p, static_cast<int>(v), x).allFinite() &&
                  mode_input_map(p, static_cast<int>(v), x).allFinite();
      }
    }
    check(rep, "drift_vanishes_at_origin", origin_ok, origin_detail);
    check(rep, "mode_evaluations_finite", eval_ok,
          "drift/input map produced non-finite values on sampled states");
  }

  return rep;
}

void validate_or_throw(const SwitchedTrackingProblem& p) {
  ValidationReport rep = validate_problem(p);
  if (!rep.all_pass()) throw ValidationError("invalid problem: " + rep.first_failure());
}

}  // namespace switchtrack
