// Command line front end. Subcommands cover the whole workflow: train the
// per-step costate approximators from a problem document, roll out policies,
// pick switching times by any of the three methods, cross-check against the
// exact linear-quadratic solution, and run the bundled two-mode benchmark
// end to end.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure,
// 3 criterion failure (oracle-check below its tolerance).

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "switchtrack/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace switchtrack;

namespace {

constexpr const char* kToolVersion = "switchtrack 1.0.0 (problem-document schema v1)";

// Bundled two-mode tracking benchmark: a Van der Pol mode handing over to a
// linear mode on [0, 3], sinusoid reference, one free switching time.
constexpr const char* kVdpDocument = R"json({
  "modes": [
    {"type": "vanderpol"},
    {"type": "linear", "A": [[0.0, 1.0], [2.0, -1.0]], "B": [[0.0], [1.0]]}
  ],
  "sequence": [1, 2],
  "t0": 0.0,
  "tf": 3.0,
  "S": [[100000.0, 0.0], [0.0, 100000.0]],
  "Qbar": [[100000.0, 0.0], [0.0, 10000000.0]],
  "Rbar": [[1000.0]],
  "reference": {"type": "sinusoid", "r0": [0.0, 0.0]},
  "omega": {"state_lo": [-4.0, -4.0], "state_hi": [4.0, 4.0], "switch_margin": 0.003},
  "dthat": 0.001,
  "basis_degree": 3,
  "terminal_factor": 1.0,
  "train": {"eta": 1000, "gamma": 1e-6, "max_inner": 50}
})json";

// Switching time previously reported for this benchmark. That run was
// unseeded, so the value serves as a reference rather than a target.
constexpr double kVdpReferenceT1 = 2.654;

struct ExecOpts {
  int threads = 0;
  bool serial = false;

  ExecPolicy policy() const {
    ExecPolicy e;
    e.mode = serial ? Exec::Serial : Exec::Parallel;
    e.threads = threads;
    return e;
  }
};

void add_exec_options(CLI::App* cmd, ExecOpts& opts) {
  cmd->add_option("--threads", opts.threads, "cap on parallel workers (0 = all available)");
  cmd->add_flag("--serial", opts.serial, "use the serial reference kernels");
}

Vec parse_vector(const std::string& text, const char* what) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": cannot parse '" + tok + "' as a number");
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size())
      throw ValidationError(std::string(what) + ": cannot parse '" + tok + "' as a number");
    vals.push_back(v);
  }
  if (vals.empty()) throw ValidationError(std::string(what) + ": empty value list");
  Vec v(static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) v(static_cast<long>(i)) = vals[i];
  return v;
}

Vec parse_state(const std::string& text, const SwitchedTrackingProblem& p) {
  Vec x0 = parse_vector(text, "--x0");
  if (x0.size() != p.state_dim())
    throw ValidationError("--x0: expected " + std::to_string(p.state_dim()) +
                          " components, got " + std::to_string(x0.size()));
  return x0;
}

// Rollouts accept any strictly ordered interior switch vector; the training
// margin only constrains where candidates are sampled.
SwitchVector parse_switch_vector(const std::string& text, const SwitchedTrackingProblem& p) {
  Vec t = parse_vector(text, "--tsw");
  if (t.size() != p.num_switches())
    throw ValidationError("--tsw: expected " + std::to_string(p.num_switches()) +
                          " switching times, got " + std::to_string(t.size()));
  return SwitchVector::checked(std::vector<double>(t.data(), t.data() + t.size()), p.t0, p.tf);
}

ProblemDocument load_and_validate(const fs::path& config_path) {
  ProblemDocument doc = load_problem_document(config_path);
  ValidationReport rep = validate_problem(doc.problem);
  if (!rep.all_pass()) {
    std::ostringstream msg;
    msg << "problem document failed validation:";
    for (const auto& c : rep.checks)
      if (!c.pass) msg << "\n  " << c.name << ": " << c.detail;
    throw ValidationError(msg.str());
  }
  return doc;
}

void write_text_file(const fs::path& requested, const std::function<void(std::ostream&)>& body) {
  fs::path out = resolve_output_path(requested);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream os(out, std::ios::binary);
  if (!os) throw ValidationError("cannot open output file " + out.string());
  body(os);
  os.flush();
  if (!os) throw ValidationError("write failed on " + out.string());
  std::cout << "wrote " << out.string() << "\n";
}

void write_json_file(const fs::path& requested, const json& j) {
  write_text_file(requested, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

// sibling of `base` named stem+suffix (weights.txt -> weights_history.csv)
fs::path derive_path(const fs::path& base, const std::string& suffix) {
  return base.parent_path() / (base.stem().string() + suffix);
}

std::vector<std::string> variable_names(int num_switches, int state_dim) {
  std::vector<std::string> names;
  for (int i = 1; i <= num_switches; ++i) names.push_back("t" + std::to_string(i));
  for (int i = 1; i <= state_dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

// Candidate grid for the exhaustive sweep: a single switch gets `per_axis`
// evenly spaced times, several switches get the ordered tuples of the tensor
// grid that keep the margin gap.
std::vector<SwitchVector> grid_candidates(const SwitchedTrackingProblem& p, int per_axis) {
  if (p.num_switches() == 1) return uniform_candidates(p, per_axis);
  if (per_axis < 1) throw ValidationError("candidate count must be positive");
  double lo = p.t0 + p.switch_margin();
  double hi = p.tf - p.switch_margin();
  std::vector<double> axis(static_cast<size_t>(per_axis));
  for (int i = 0; i < per_axis; ++i)
    axis[static_cast<size_t>(i)] =
        per_axis == 1 ? 0.5 * (lo + hi)
                      : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(per_axis - 1);
  std::vector<SwitchVector> out;
  std::vector<double> cur;
  std::function<void(int, int)> build = [&](int k, int start) {
    if (k == p.num_switches()) {
      out.push_back(SwitchVector{cur});
      return;
    }
    for (int i = start; i < per_axis; ++i) {
      if (!cur.empty() && axis[static_cast<size_t>(i)] - cur.back() < p.switch_margin()) continue;
      cur.push_back(axis[static_cast<size_t>(i)]);
      build(k + 1, i + 1);
      cur.pop_back();
    }
  };
  build(0, 0);
  if (out.empty()) throw ValidationError("no ordered candidate tuples fit inside the horizon");
  return out;
}

json switch_vector_json(const SwitchVector& sw) {
  json a = json::array();
  for (double t : sw.times) a.push_back(t);
  return a;
}

double wall_seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- train ---

struct TrainArgs {
  std::string config;
  std::string out = "weights.txt";
  std::string history;
  std::string report;
  std::string by_step;
  std::uint64_t seed = 0;
  ExecOpts exec;
};

TrainResult run_training(const ProblemDocument& doc, const TransformedGrid& grid,
                         std::uint64_t seed, const ExecPolicy& exec) {
  if (grid.adjusted)
    std::cerr << "note: dthat snapped to " << format_full(grid.dthat)
              << " so every segment holds a whole number of steps\n";
  TrainConfig cfg = doc.train;
  cfg.seed = seed;
  std::cout << "training: N' = " << grid.nprime << " steps, eta = " << cfg.eta
            << ", basis degree " << cfg.basis_degree << "\n";
  TrainResult res = train(doc.problem, grid, cfg, exec);
  std::cout << "trained in " << res.report.wall_seconds << " s ("
            << res.report.total_inner_iterations << " inner iterations, "
            << res.report.capped_steps << " capped steps, " << res.report.discarded_samples
            << " resampled draws)\n";
  return res;
}

int cmd_train(const TrainArgs& a) {
  ProblemDocument doc = load_and_validate(a.config);
  TransformedGrid grid = doc.grid();
  TrainResult res = run_training(doc, grid, a.seed, a.exec.policy());

  std::string prov = provenance(a.seed, doc.hash);
  fs::path out(a.out);
  write_text_file(out, [&](std::ostream& os) { save_weights(os, res.net, doc.hash); });
  fs::path history = a.history.empty() ? derive_path(out, "_history.csv") : fs::path(a.history);
  write_text_file(history,
                  [&](std::ostream& os) { write_weight_history_csv(os, res.report, prov); });
  if (!a.by_step.empty())
    write_text_file(a.by_step,
                    [&](std::ostream& os) { write_weights_by_step_csv(os, res.net, prov); });

  json rep = train_report_json(res.report);
  rep["provenance"] = prov;
  rep["nprime"] = grid.nprime;
  rep["basis_size"] = res.net.basis.size();
  rep["eta"] = doc.train.eta;
  rep["seed"] = a.seed;
  fs::path report = a.report.empty() ? derive_path(out, "_report.json") : fs::path(a.report);
  write_json_file(report, rep);
  return 0;
}

// -------------------------------------------------------------- rollout ---

struct RolloutArgs {
  std::string config;
  std::string weights;
  std::string tsw;
  std::string x0;
  std::string out = "trajectory.csv";
  std::string summary;
  std::string policy = "costate";
};

int cmd_rollout(const RolloutArgs& a) {
  ProblemDocument doc = load_and_validate(a.config);
  TransformedGrid grid = doc.grid();
  SwitchVector sw = parse_switch_vector(a.tsw, doc.problem);
  Vec x0 = parse_state(a.x0, doc.problem);

  LoadedWeights lw;
  Policy pol;
  std::uint64_t seed = 0;
  if (a.policy == "zero") {
    pol = Policy::zero();
  } else {
    if (a.weights.empty())
      throw ValidationError("--weights is required unless --policy zero is chosen");
    lw = load_weights_file(a.weights);
    require_compatible(lw, doc);
    pol = Policy::costate_feedback(lw.net);
    seed = lw.net.seed;
  }

  Trajectory traj = rollout(doc.problem, grid, sw, pol, x0);
  std::string prov = provenance(seed, doc.hash);
  write_text_file(a.out,
                  [&](std::ostream& os) { write_trajectory_csv(os, traj, doc.problem, grid, prov); });

  Vec terminal_err = traj.states.row(grid.nprime) - traj.refs.row(grid.nprime);
  json rms = json::array();
  for (int i = 0; i < doc.problem.state_dim(); ++i) {
    double acc = 0.0;
    for (long k = 0; k <= grid.nprime; ++k) {
      double e = traj.states(k, i) - traj.refs(k, i);
      acc += e * e;
    }
    rms.push_back(std::sqrt(acc / static_cast<double>(grid.nprime + 1)));
  }

  json j;
  j["provenance"] = prov;
  j["policy"] = a.policy;
  j["tsw"] = switch_vector_json(sw);
  j["nprime"] = grid.nprime;
  j["total_cost"] = traj.total_cost;
  j["terminal_cost"] = traj.terminal_cost;
  j["terminal_error_norm"] = terminal_err.norm();
  j["rms_tracking_error"] = rms;
  fs::path summary =
      a.summary.empty() ? derive_path(fs::path(a.out), "_summary.json") : fs::path(a.summary);
  write_json_file(summary, j);

  std::cout << "total cost " << format_full(traj.total_cost) << ", terminal error "
            << terminal_err.norm() << "\n";
  return 0;
}

// ---------------------------------------------------------------- sweep ---

struct SweepArgs {
  std::string config;
  std::string weights;
  std::string x0;
  int method = 3;
  int grid_points = 30;
  std::string out = "value_curve.csv";
  std::string summary;
  std::string poly;
  ExecOpts exec;
};

int cmd_sweep(const SweepArgs& a) {
  ProblemDocument doc = load_and_validate(a.config);
  TransformedGrid grid = doc.grid();
  LoadedWeights lw = load_weights_file(a.weights);
  require_compatible(lw, doc);
  Vec x0 = parse_state(a.x0, doc.problem);
  std::string prov = provenance(lw.net.seed, doc.hash);

  json j;
  j["provenance"] = prov;
  j["method"] = a.method;
  j["x0"] = std::vector<double>(x0.data(), x0.data() + x0.size());

  if (a.method == 3) {
    std::vector<SwitchVector> cands = grid_candidates(doc.problem, a.grid_points);
    ValueCurve curve =
        method3_sweep(lw.net, doc.problem, grid, x0, cands, a.exec.policy());
    write_text_file(a.out, [&](std::ostream& os) {
      write_value_curve_csv(os, curve, doc.problem.num_switches(), prov);
    });
    if (curve.argmin_index < 0) throw NumericalError("every sweep candidate diverged");
    const ValueCurvePoint& best = curve.best();
    long feasible = std::count_if(curve.samples.begin(), curve.samples.end(),
                                  [](const ValueCurvePoint& s) { return s.feasible; });
    j["candidates"] = curve.samples.size();
    j["feasible"] = feasible;
    j["tsw"] = best.tsw;
    j["cost"] = best.J;
    std::cout << "method 3: best tsw " << format_full(best.tsw.front()) << ", cost "
              << format_full(best.J) << " (" << feasible << "/" << curve.samples.size()
              << " candidates feasible)\n";
  } else if (a.method == 1) {
    Method1Result m1 = method1_scalar(lw.net, doc.problem, grid, x0, a.exec.policy());
    write_text_file(a.out, [&](std::ostream& os) {
      write_value_curve_csv(os, m1.evals, doc.problem.num_switches(), prov);
    });
    j["tsw"] = m1.best.times;
    j["cost"] = m1.J;
    j["fell_back"] = m1.fell_back;
    j["evaluations"] = m1.evals.samples.size();
    if (m1.fell_back)
      std::cerr << "note: cost curve was not unimodal; answered by an exhaustive sweep\n";
    std::cout << "method 1: best tsw " << format_full(m1.best.times.front()) << ", cost "
              << format_full(m1.J) << " (" << m1.evals.samples.size() << " rollouts)\n";
  } else if (a.method == 2) {
    Method2Result m2 = method2_analytic(lw.net, doc.problem, grid, x0);
    fs::path poly_path =
        a.poly.empty() ? derive_path(fs::path(a.out), "_poly.txt") : fs::path(a.poly);
    write_text_file(poly_path, [&](std::ostream& os) {
      write_poly_text(os, m2.value_poly,
                      variable_names(doc.problem.num_switches(), doc.problem.state_dim()), prov);
    });
    // the analytic curve is cheap, so sample it densely for plotting
    ValueCurve curve;
    curve.method = "method2";
    int samples = std::max(a.grid_points, 200);
    double lo = doc.problem.t0 + doc.problem.switch_margin();
    double hi = doc.problem.tf - doc.problem.switch_margin();
    for (int i = 0; i < samples; ++i) {
      double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
      Vec arg(1);
      arg(0) = t;
      curve.samples.push_back({{t}, m2.univariate.eval(arg), true});
      if (curve.argmin_index < 0 ||
          curve.samples[static_cast<size_t>(curve.argmin_index)].J > curve.samples.back().J)
        curve.argmin_index = static_cast<int>(curve.samples.size()) - 1;
    }
    write_text_file(a.out, [&](std::ostream& os) {
      write_value_curve_csv(os, curve, doc.problem.num_switches(), prov);
    });
    // the surrogate ranks candidates; report the actual rollout cost as well
    Trajectory at_best =
        rollout(doc.problem, grid, m2.best, Policy::costate_feedback(lw.net), x0);
    j["tsw"] = m2.best.times;
    j["surrogate_value"] = m2.value_at_best;
    j["rollout_cost"] = at_best.total_cost;
    j["curl_defect"] = m2.curl_defect;
    j["polynomial_file"] = poly_path.string();
    std::cout << "method 2: best tsw " << format_full(m2.best.times.front())
              << ", surrogate value " << format_full(m2.value_at_best) << ", rollout cost "
              << format_full(at_best.total_cost) << ", curl defect " << m2.curl_defect << "\n";
  } else {
    throw ValidationError("--method must be 1, 2 or 3");
  }

  fs::path summary =
      a.summary.empty() ? derive_path(fs::path(a.out), "_summary.json") : fs::path(a.summary);
  write_json_file(summary, j);
  return 0;
}

// --------------------------------------------------------- oracle-check ---

struct OracleArgs {
  std::string config;
  std::uint64_t seed = 0;
  int points = 100;
  ExecOpts exec;
};

int cmd_oracle_check(const OracleArgs& a) {
  ProblemDocument doc = load_and_validate(a.config);
  for (size_t v = 0; v < doc.problem.modes.size(); ++v)
    if (doc.problem.modes[v].kind != ModeDynamics::Kind::Linear)
      throw ValidationError("oracle requires linear modes (mode " + std::to_string(v + 1) +
                            " is not linear)");
  TransformedGrid grid = doc.grid();
  TrainResult res = run_training(doc, grid, a.seed, a.exec.policy());

  // held-out tuples drawn from a stream the trainer never touches
  std::mt19937_64 rng = seeded_engine(a.seed, {0x9e1d0ULL});
  const int n = doc.problem.state_dim();
  Vec tsw(doc.problem.num_switches()), x(n);
  double overall = 0.0;
  long worst_step = -1;
  int worst_point = -1;
  std::vector<double> step_max(static_cast<size_t>(grid.nprime), 0.0);
  for (int i = 0; i < a.points; ++i) {
    sample_tuple(doc.problem, rng, tsw, x);
    SwitchVector sw{std::vector<double>(tsw.data(), tsw.data() + tsw.size())};
    AffineCostateSolution sol = lq_solve(doc.problem, grid, sw);
    for (long k = 0; k < grid.nprime; ++k) {
      auto [G, h] = next_costate_map(sol, doc.problem, grid, sw, k);
      Vec exact = G * x + h;
      Vec predicted = res.net.predict(k, tsw, x);
      double rel = (predicted - exact).norm() / std::max(1e-12, exact.norm());
      step_max[static_cast<size_t>(k)] = std::max(step_max[static_cast<size_t>(k)], rel);
      if (rel > overall) {
        overall = rel;
        worst_step = k;
        worst_point = i;
      }
    }
  }

  std::vector<double> sorted = step_max;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  std::cout << "held-out points: " << a.points << ", steps: " << grid.nprime << "\n";
  std::cout << "per-step max relative costate error: median " << median << ", worst "
            << sorted.back() << "\n";
  std::cout << "overall max " << overall << " at step " << worst_step << ", point "
            << worst_point << "\n";
  const double tol = 1e-3;
  bool pass = overall <= tol;
  std::cout << (pass ? "PASS" : "FAIL") << ": max relative error "
            << (pass ? "<=" : ">") << " " << tol << "\n";
  return pass ? 0 : 3;
}

// -------------------------------------------------------- reproduce-vdp ---

struct ReproduceArgs {
  std::string outdir = "vdp_out";
  std::string x0 = "1,-0.5";
  std::uint64_t seed = 42;
  ExecOpts exec;
};

double rms_coord_error(const Trajectory& traj, int coord, long k_lo, long k_hi) {
  double acc = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    double e = traj.states(k, coord) - traj.refs(k, coord);
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(k_hi - k_lo + 1));
}

int cmd_reproduce_vdp(const ReproduceArgs& a) {
  auto t_start = std::chrono::steady_clock::now();
  ProblemDocument doc = parse_problem_document(json::parse(kVdpDocument));
  validate_or_throw(doc.problem);
  TransformedGrid grid = doc.grid();
  Vec x0 = parse_state(a.x0, doc.problem);
  ExecPolicy exec = a.exec.policy();
  fs::path dir(a.outdir);
  std::string prov = provenance(a.seed, doc.hash);

  TrainResult res = run_training(doc, grid, a.seed, exec);
  write_text_file(dir / "weights.txt",
                  [&](std::ostream& os) { save_weights(os, res.net, doc.hash); });
  write_text_file(dir / "weight_history.csv",
                  [&](std::ostream& os) { write_weight_history_csv(os, res.report, prov); });
  write_text_file(dir / "weights_by_step.csv",
                  [&](std::ostream& os) { write_weights_by_step_csv(os, res.net, prov); });
  json rep = train_report_json(res.report);
  rep["provenance"] = prov;
  rep["nprime"] = grid.nprime;
  rep["basis_size"] = res.net.basis.size();
  write_json_file(dir / "train_report.json", rep);

  // size of the trained-weight jump where the mode handover sits, against
  // the median jump elsewhere
  const auto& jumps = res.report.step_weight_jumps;
  long boundary = grid.steps_per_segment;
  std::vector<double> interior;
  for (long k = 1; k < grid.nprime; ++k)
    if (k != boundary) interior.push_back(jumps[static_cast<size_t>(k)]);
  std::nth_element(interior.begin(), interior.begin() + interior.size() / 2, interior.end());
  double median_jump = interior[interior.size() / 2];
  double boundary_jump = jumps[static_cast<size_t>(boundary)];
  double jump_ratio = boundary_jump / std::max(median_jump, 1e-300);
  std::cout << "weight jump at the segment boundary (step " << boundary
            << "): " << boundary_jump << " vs median " << median_jump << " elsewhere ("
            << jump_ratio << "x)\n";

  // switching-time selection by all three methods
  Method1Result m1 = method1_scalar(res.net, doc.problem, grid, x0, exec);
  write_text_file(dir / "value_curve_m1.csv", [&](std::ostream& os) {
    write_value_curve_csv(os, m1.evals, doc.problem.num_switches(), prov);
  });

  Method2Result m2 = method2_analytic(res.net, doc.problem, grid, x0);
  write_text_file(dir / "method2_value_poly.txt", [&](std::ostream& os) {
    write_poly_text(os, m2.value_poly,
                    variable_names(doc.problem.num_switches(), doc.problem.state_dim()), prov);
  });
  write_text_file(dir / "method2_value_univariate.txt", [&](std::ostream& os) {
    write_poly_text(os, m2.univariate, {"t1"}, prov);
  });
  ValueCurve curve2;
  curve2.method = "method2";
  {
    double lo = doc.problem.t0 + doc.problem.switch_margin();
    double hi = doc.problem.tf - doc.problem.switch_margin();
    for (int i = 0; i < 200; ++i) {
      double t = lo + (hi - lo) * static_cast<double>(i) / 199.0;
      Vec arg(1);
      arg(0) = t;
      curve2.samples.push_back({{t}, m2.univariate.eval(arg), true});
      if (curve2.argmin_index < 0 ||
          curve2.samples[static_cast<size_t>(curve2.argmin_index)].J > curve2.samples.back().J)
        curve2.argmin_index = static_cast<int>(curve2.samples.size()) - 1;
    }
  }
  write_text_file(dir / "value_curve_m2.csv", [&](std::ostream& os) {
    write_value_curve_csv(os, curve2, doc.problem.num_switches(), prov);
  });

  std::vector<SwitchVector> cands = uniform_candidates(doc.problem, 30);
  ValueCurve curve3 = method3_sweep(res.net, doc.problem, grid, x0, cands, exec);
  write_text_file(dir / "value_curve_m3.csv", [&](std::ostream& os) {
    write_value_curve_csv(os, curve3, doc.problem.num_switches(), prov);
  });
  if (curve3.argmin_index < 0) throw NumericalError("every sweep candidate diverged");

  double t1_m1 = m1.best.times.front();
  double t1_m2 = m2.best.times.front();
  double t1_m3 = curve3.best().tsw.front();
  std::cout << "method 1 (line search):    t1 = " << format_full(t1_m1) << ", cost "
            << format_full(m1.J) << (m1.fell_back ? "  [fell back to a sweep]" : "") << "\n";
  std::cout << "method 2 (analytic):       t1 = " << format_full(t1_m2) << ", surrogate value "
            << format_full(m2.value_at_best) << ", curl defect " << m2.curl_defect << "\n";
  std::cout << "method 3 (30-point sweep): t1 = " << format_full(t1_m3) << ", cost "
            << format_full(curve3.best().J) << "\n";
  std::cout << "reference switching time reported for this benchmark: "
            << format_full(kVdpReferenceT1) << " (unseeded run; not a target)\n";

  // The headline trajectory follows the analytic pick: this benchmark selects its
  // switching time by minimizing the integrated value polynomial, and the two
  // sweep-based methods are reported alongside as cross-checks.
  SwitchVector chosen = m2.best;
  std::cout << "rolling out at the analytic pick t1 = " << format_full(chosen.times.front())
            << "\n";
  Trajectory best = rollout(doc.problem, grid, chosen, Policy::costate_feedback(res.net), x0);
  write_text_file(dir / "traj_best.csv", [&](std::ostream& os) {
    write_trajectory_csv(os, best, doc.problem, grid, prov);
  });
  Trajectory zero = rollout(doc.problem, grid, chosen, Policy::zero(), x0);
  write_text_file(dir / "traj_zero.csv", [&](std::ostream& os) {
    write_trajectory_csv(os, zero, doc.problem, grid, prov);
  });

  // tracking quality on the window where the reference is in full swing
  long k_lo = std::lround(0.5 / grid.dthat);
  long k_hi = std::lround(2.0 / grid.dthat);
  double rms_trained = rms_coord_error(best, 1, k_lo, k_hi);
  double rms_zero = rms_coord_error(zero, 1, k_lo, k_hi);
  double rms_ratio = rms_trained / std::max(rms_zero, 1e-300);
  std::cout << "RMS(x2 - r2) on that in [0.5, 2]: trained " << rms_trained << ", zero control "
            << rms_zero << " (ratio " << rms_ratio << ")\n";

  double total_wall = wall_seconds_since(t_start);
  json summary;
  summary["provenance"] = prov;
  summary["seed"] = a.seed;
  summary["nprime"] = grid.nprime;
  summary["train_wall_seconds"] = res.report.wall_seconds;
  summary["total_wall_seconds"] = total_wall;
  summary["capped_steps"] = res.report.capped_steps;
  summary["weight_jump"] = {{"boundary_step", boundary},
                            {"at_boundary", boundary_jump},
                            {"median_elsewhere", median_jump},
                            {"ratio", jump_ratio}};
  summary["method1"] = {{"t1", t1_m1},
                        {"cost", m1.J},
                        {"fell_back", m1.fell_back},
                        {"evaluations", m1.evals.samples.size()}};
  summary["method2"] = {{"t1", t1_m2},
                        {"surrogate_value", m2.value_at_best},
                        {"rollout_cost", best.total_cost},
                        {"curl_defect", m2.curl_defect}};
  summary["method3"] = {{"t1", t1_m3}, {"cost", curve3.best().J}};
  summary["agreement"] = {{"m1_vs_m3", std::abs(t1_m1 - t1_m3)},
                          {"m2_vs_m3", std::abs(t1_m2 - t1_m3)}};
  summary["reference_t1"] = kVdpReferenceT1;
  summary["chosen_method"] = 2;
  summary["chosen_t1"] = chosen.times.front();
  summary["rms_x2"] = {{"trained", rms_trained}, {"zero", rms_zero}, {"ratio", rms_ratio}};
  write_json_file(dir / "summary.json", summary);

  std::cout << "finished in " << total_wall << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-horizon tracking for switched systems with trained costate feedback"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "train per-step costate approximators on a problem document");
  train_cmd->add_option("config", train_args.config, "problem document (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--out", train_args.out, "weights file to write");
  train_cmd->add_option("--history", train_args.history,
                        "inner-iteration history CSV (default: <out>_history.csv)");
  train_cmd->add_option("--report", train_args.report,
                        "training report JSON (default: <out>_report.json)");
  train_cmd->add_option("--by-step", train_args.by_step,
                        "also write the per-step trained weights as CSV");
  train_cmd->add_option("--seed", train_args.seed, "sampling seed");
  add_exec_options(train_cmd, train_args.exec);

  RolloutArgs rollout_args;
  CLI::App* rollout_cmd =
      app.add_subcommand("rollout", "closed-loop rollout at a fixed switch vector");
  rollout_cmd->add_option("config", rollout_args.config, "problem document (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("-w,--weights", rollout_args.weights, "trained weights file")
      ->check(CLI::ExistingFile);
  rollout_cmd->add_option("--tsw", rollout_args.tsw, "switching times, comma separated")
      ->required();
  rollout_cmd->add_option("--x0", rollout_args.x0, "initial state, comma separated")->required();
  rollout_cmd->add_option("-o,--out", rollout_args.out, "trajectory CSV to write");
  rollout_cmd->add_option("--summary", rollout_args.summary,
                          "summary JSON (default: <out>_summary.json)");
  rollout_cmd->add_option("--policy", rollout_args.policy, "feedback policy")
      ->check(CLI::IsMember({"costate", "zero"}));

  SweepArgs sweep_args;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "pick switching times by one of the three methods");
  sweep_cmd->add_option("config", sweep_args.config, "problem document (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("-w,--weights", sweep_args.weights, "trained weights file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--x0", sweep_args.x0, "initial state, comma separated")->required();
  sweep_cmd->add_option("--method", sweep_args.method,
                        "1 = golden-section line search, 2 = analytic surrogate, 3 = sweep")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  sweep_cmd->add_option("--grid", sweep_args.grid_points, "candidates for the sweep");
  sweep_cmd->add_option("-o,--out", sweep_args.out, "value-curve CSV to write");
  sweep_cmd->add_option("--summary", sweep_args.summary,
                        "summary JSON (default: <out>_summary.json)");
  sweep_cmd->add_option("--poly", sweep_args.poly,
                        "method 2 polynomial file (default: <out>_poly.txt)");
  add_exec_options(sweep_cmd, sweep_args.exec);

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "train on an all-linear problem and compare against the exact costates");
  oracle_cmd->add_option("config", oracle_args.config, "problem document (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  oracle_cmd->add_option("--seed", oracle_args.seed, "sampling seed");
  oracle_cmd->add_option("--points", oracle_args.points, "held-out evaluation points")
      ->check(CLI::PositiveNumber);
  add_exec_options(oracle_cmd, oracle_args.exec);

  ReproduceArgs repro_args;
  CLI::App* repro_cmd = app.add_subcommand(
      "reproduce-vdp", "run the bundled Van der Pol / linear two-mode benchmark end to end");
  repro_cmd->add_option("-o,--outdir", repro_args.outdir, "directory for the artifact bundle");
  repro_cmd->add_option("--x0", repro_args.x0, "initial state, comma separated");
  repro_cmd->add_option("--seed", repro_args.seed, "sampling seed");
  add_exec_options(repro_cmd, repro_args.exec);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args);
    if (rollout_cmd->parsed()) return cmd_rollout(rollout_args);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
    if (oracle_cmd->parsed()) return cmd_oracle_check(oracle_args);
    if (repro_cmd->parsed()) return cmd_reproduce_vdp(repro_args);
  } catch (const DivergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
