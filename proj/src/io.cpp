#include "switchtrack/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace switchtrack {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Mat parse_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ValidationError(name + " must be a non-empty array of rows");
  const long rows = static_cast<long>(j.size());
  const long cols = static_cast<long>(j.front().size());
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<size_t>(r));
    if (static_cast<long>(row.size()) != cols)
      throw ValidationError(name + " has ragged rows");
    for (long c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  return m;
}

Vec parse_vector(const json& j, const std::string& name) {
  if (!j.is_array()) throw ValidationError(name + " must be an array");
  Vec v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<size_t>(i)).get<double>();
  return v;
}

}  // namespace

ProblemDocument parse_problem_document(const json& j) {
  ProblemDocument doc;
  SwitchedTrackingProblem& p = doc.problem;
  try {
    for (const auto& jm : j.at("modes")) {
      std::string type = jm.at("type").get<std::string>();
      if (type == "linear")
        p.modes.push_back(ModeDynamics::linear(parse_matrix(jm.at("A"), "A"),
                                               parse_matrix(jm.at("B"), "B")));
      else if (type == "vanderpol")
        p.modes.push_back(ModeDynamics::vanderpol());
      else
        throw ValidationError("unknown mode type '" + type + "'");
    }
    for (const auto& s : j.at("sequence")) {
      int v = s.get<int>();  // document uses 1-based mode indices
      if (v < 1 || v > static_cast<int>(p.modes.size()))
        throw ValidationError("sequence entry " + std::to_string(v) +
                              " does not name a mode in [1, " +
                              std::to_string(p.modes.size()) + "]");
      p.sequence.push_back(v - 1);
    }
    p.t0 = j.at("t0").get<double>();
    p.tf = j.at("tf").get<double>();
    p.cost.S = parse_matrix(j.at("S"), "S");
    p.cost.Qbar = parse_matrix(j.at("Qbar"), "Qbar");
    p.cost.Rbar = parse_matrix(j.at("Rbar"), "Rbar");

    const auto& jr = j.at("reference");
    std::string rtype = jr.at("type").get<std::string>();
    Vec r0 = parse_vector(jr.at("r0"), "reference.r0");
    if (rtype == "sinusoid")
      p.reference = ReferenceModel::sinusoid(r0);
    else if (rtype == "constant")
      p.reference = ReferenceModel::constant(r0);
    else
      throw ValidationError("unknown reference type '" + rtype + "'");

    const auto& jo = j.at("omega");
    p.omega.state_lo = parse_vector(jo.at("state_lo"), "omega.state_lo");
    p.omega.state_hi = parse_vector(jo.at("state_hi"), "omega.state_hi");
    p.omega.switch_margin = jo.value("switch_margin", 0.0);

    p.terminal_factor = j.value("terminal_factor", 1.0);
    doc.dthat = j.at("dthat").get<double>();
    doc.train.basis_degree = j.value("basis_degree", 3);
    if (j.contains("train")) {
      const auto& jt = j.at("train");
      doc.train.eta = jt.value("eta", doc.train.eta);
      doc.train.gamma = jt.value("gamma", doc.train.gamma);
      doc.train.max_inner = jt.value("max_inner", doc.train.max_inner);
      doc.train.ridge = jt.value("ridge", doc.train.ridge);
      doc.train.resample = jt.value("resample", doc.train.resample);
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed problem document: ") + e.what());
  }
  doc.hash = fnv1a64(j.dump());
  return doc;
}

ProblemDocument load_problem_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open problem document " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("problem document " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_problem_document(j);
}

std::string provenance(std::uint64_t seed, std::uint64_t config_hash) {
  return "seed=" + std::to_string(seed) + " config_hash=" + hex64(config_hash);
}

void save_weights(std::ostream& os, const CostateNetwork& net, std::uint64_t config_hash) {
  os << "# switchtrack weights v1\n";
  os << "# " << provenance(net.seed, config_hash) << "\n";
  os << "n " << net.state_dim << "\n";
  os << "m " << net.input_dim << "\n";
  os << "K " << net.num_switches << "\n";
  os << "degree " << net.basis.degree << "\n";
  os << "m_lambda " << net.basis.size() << "\n";
  os << "Nprime " << net.nprime << "\n";
  os << "dthat " << format_full(net.dthat) << "\n";
  os << "terminal_factor " << format_full(net.terminal_factor) << "\n";
  os << "seed " << net.seed << "\n";
  os << "config_hash " << hex64(config_hash) << "\n";
  os << "switch_margin " << format_full(net.switch_margin) << "\n";
  os << "state_lo";
  for (long i = 0; i < net.state_lo.size(); ++i) os << " " << format_full(net.state_lo(i));
  os << "\nstate_hi";
  for (long i = 0; i < net.state_hi.size(); ++i) os << " " << format_full(net.state_hi(i));
  os << "\nbasis\n";
  for (const auto& mono : net.basis.monomials) {
    for (size_t i = 0; i < mono.size(); ++i) os << (i ? " " : "") << mono[i];
    os << "\n";
  }
  for (long k = 0; k < net.nprime; ++k) {
    os << "step " << k << "\n";
    const Mat& W = net.weights[static_cast<size_t>(k)];
    for (long r = 0; r < W.rows(); ++r) {
      for (long c = 0; c < W.cols(); ++c) os << (c ? " " : "") << format_full(W(r, c));
      os << "\n";
    }
  }
  os << "end\n";
}

void save_weights_file(const std::filesystem::path& path, const CostateNetwork& net,
                       std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write weights file " + path.string());
  save_weights(out, net, config_hash);
  if (!out) throw ValidationError("failed while writing weights file " + path.string());
}

namespace {

std::string next_data_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') return line;
  }
  throw ValidationError("weights file ended unexpectedly");
}

template <typename T>
T parse_field(std::istream& is, const std::string& key) {
  std::istringstream ss(next_data_line(is));
  std::string k;
  T value{};
  ss >> k >> value;
  if (k != key || ss.fail())
    throw ValidationError("weights file: expected field '" + key + "', found '" + k + "'");
  return value;
}

}  // namespace

LoadedWeights load_weights(std::istream& is) {
  LoadedWeights out;
  CostateNetwork& net = out.net;
  net.state_dim = parse_field<int>(is, "n");
  net.input_dim = parse_field<int>(is, "m");
  net.num_switches = parse_field<int>(is, "K");
  int degree = parse_field<int>(is, "degree");
  int m_lambda = parse_field<int>(is, "m_lambda");
  net.nprime = parse_field<long>(is, "Nprime");
  net.dthat = parse_field<double>(is, "dthat");
  net.terminal_factor = parse_field<double>(is, "terminal_factor");
  net.seed = parse_field<std::uint64_t>(is, "seed");
  {
    std::istringstream ss(next_data_line(is));
    std::string k, hex;
    ss >> k >> hex;
    if (k != "config_hash") throw ValidationError("weights file: expected field 'config_hash'");
    out.config_hash = std::stoull(hex, nullptr, 16);
  }
  net.switch_margin = parse_field<double>(is, "switch_margin");
  auto parse_vec_line = [&](const std::string& key) {
    std::istringstream ss(next_data_line(is));
    std::string k;
    ss >> k;
    if (k != key) throw ValidationError("weights file: expected field '" + key + "'");
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    return Eigen::Map<Vec>(vals.data(), static_cast<long>(vals.size())).eval();
  };
  net.state_lo = parse_vec_line("state_lo");
  net.state_hi = parse_vec_line("state_hi");
  if (net.state_lo.size() != net.state_dim || net.state_hi.size() != net.state_dim)
    throw ValidationError("weights file: sampling box dimension mismatch");

  if (next_data_line(is) != "basis")
    throw ValidationError("weights file: expected basis table");
  net.basis.nvars = net.num_switches + net.state_dim;
  net.basis.degree = degree;
  net.basis.monomials.resize(static_cast<size_t>(m_lambda));
  for (auto& mono : net.basis.monomials) {
    std::istringstream ss(next_data_line(is));
    mono.resize(static_cast<size_t>(net.basis.nvars));
    for (auto& e : mono) ss >> e;
    if (ss.fail()) throw ValidationError("weights file: malformed basis exponent row");
  }

  net.weights.resize(static_cast<size_t>(net.nprime));
  for (long k = 0; k < net.nprime; ++k) {
    std::istringstream ss(next_data_line(is));
    std::string word;
    long idx = -1;
    ss >> word >> idx;
    if (word != "step" || idx != k)
      throw ValidationError("weights file: expected 'step " + std::to_string(k) + "'");
    Mat W(m_lambda, net.state_dim);
    for (long r = 0; r < W.rows(); ++r) {
      std::istringstream row(next_data_line(is));
      for (long c = 0; c < W.cols(); ++c) row >> W(r, c);
      if (row.fail()) throw ValidationError("weights file: malformed weight row");
    }
    net.weights[static_cast<size_t>(k)] = std::move(W);
  }
  if (next_data_line(is) != "end") throw ValidationError("weights file: missing end marker");
  return out;
}

LoadedWeights load_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weights file " + path.string());
  return load_weights(in);
}

void require_compatible(const LoadedWeights& weights, const ProblemDocument& doc) {
  const CostateNetwork& net = weights.net;
  TransformedGrid grid = doc.grid();
  std::vector<std::string> mismatches;
  auto expect = [&](const std::string& what, const std::string& got, const std::string& want) {
    if (got != want) mismatches.push_back(what + ": weights have " + got + ", config needs " + want);
  };
  expect("state dimension", std::to_string(net.state_dim), std::to_string(doc.problem.state_dim()));
  expect("input dimension", std::to_string(net.input_dim), std::to_string(doc.problem.input_dim()));
  expect("switch count", std::to_string(net.num_switches),
         std::to_string(doc.problem.num_switches()));
  expect("steps", std::to_string(net.nprime), std::to_string(grid.nprime));
  expect("dthat", format_full(net.dthat), format_full(grid.dthat));
  expect("basis degree", std::to_string(net.basis.degree),
         std::to_string(doc.train.basis_degree));
  expect("terminal factor", format_full(net.terminal_factor),
         format_full(doc.problem.terminal_factor));
  expect("config hash", hex64(weights.config_hash), hex64(doc.hash));
  if (!mismatches.empty()) {
    std::string msg = "weights are incompatible with this configuration:";
    for (const auto& m : mismatches) msg += "\n  " + m;
    throw ValidationError(msg);
  }
}

void write_value_curve_csv(std::ostream& os, const ValueCurve& curve, int num_switches,
                           const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  for (int j = 1; j <= num_switches; ++j) os << "t" << j << ",";
  os << "J,feasible\n";
  for (const auto& s : curve.samples) {
    for (double t : s.tsw) os << format_full(t) << ",";
    os << format_full(s.J) << "," << (s.feasible ? 1 : 0) << "\n";
  }
}

void write_weight_history_csv(std::ostream& os, const TrainReport& report,
                              const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "khat,iteration,frobenius_change,residual_rms\n";
  for (const auto& step : report.steps)
    for (size_t i = 0; i < step.change_norms.size(); ++i)
      os << step.khat << "," << i + 1 << "," << format_full(step.change_norms[i]) << ","
         << format_full(step.residual_rms[i]) << "\n";
}

void write_weights_by_step_csv(std::ostream& os, const CostateNetwork& net,
                               const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "khat,that,norm,jump_from_prev";
  for (int r = 0; r < net.basis.size(); ++r)
    for (int c = 0; c < net.state_dim; ++c) os << ",w_" << r << "_" << c;
  os << "\n";
  for (long k = 0; k < net.nprime; ++k) {
    const Mat& W = net.weights[static_cast<size_t>(k)];
    double jump = k == 0 ? 0.0 : (W - net.weights[static_cast<size_t>(k - 1)]).norm();
    os << k << "," << format_full(static_cast<double>(k) * net.dthat) << ","
       << format_full(W.norm()) << "," << format_full(jump);
    for (long r = 0; r < W.rows(); ++r)
      for (long c = 0; c < W.cols(); ++c) os << "," << format_full(W(r, c));
    os << "\n";
  }
}

void write_poly_text(std::ostream& os, const PolynomialExpression& poly,
                     const std::vector<std::string>& names, const std::string& header_comment) {
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "# variables:";
  for (int j = 0; j < poly.nvars; ++j)
    os << " " << (static_cast<size_t>(j) < names.size() ? names[static_cast<size_t>(j)]
                                                        : "v" + std::to_string(j));
  os << "\n# coefficient";
  for (int j = 0; j < poly.nvars; ++j)
    os << ",exp_" << (static_cast<size_t>(j) < names.size() ? names[static_cast<size_t>(j)]
                                                            : "v" + std::to_string(j));
  os << "\n";
  for (const auto& t : poly.terms) {
    os << format_full(t.coeff);
    for (int e : t.expo) os << "," << e;
    os << "\n";
  }
}

nlohmann::json train_report_json(const TrainReport& report) {
  json j;
  j["wall_seconds"] = report.wall_seconds;
  j["total_inner_iterations"] = report.total_inner_iterations;
  j["capped_steps"] = report.capped_steps;
  j["discarded_samples"] = report.discarded_samples;
  json steps = json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"khat", s.khat},
                     {"inner_iterations", s.change_norms.size()},
                     {"final_change", s.change_norms.empty() ? 0.0 : s.change_norms.back()},
                     {"final_residual_rms",
                      s.residual_rms.empty() ? 0.0 : s.residual_rms.back()},
                     {"capped", s.capped},
                     {"discarded", s.discarded}});
  }
  j["steps"] = std::move(steps);
  return j;
}

std::filesystem::path resolve_output_path(const std::filesystem::path& path) {
  const char* base = std::getenv("SWITCHTRACK_OUT");
  if (base && *base && path.is_relative()) return std::filesystem::path(base) / path;
  return path;
}

}  // namespace switchtrack
