#pragma once

#include <filesystem>
#include <iosfwd>

#include "switchtrack/oracle.hpp"
#include "switchtrack/switchopt.hpp"

#include <json.hpp>

namespace switchtrack {

// A parsed problem document: the problem itself plus the discretization and
// training settings that travel with it. `hash` fingerprints the canonical
// JSON so emitted artifacts can be traced back to their configuration.
struct ProblemDocument {
  SwitchedTrackingProblem problem;
  double dthat = 0.001;
  TrainConfig train;
  std::uint64_t hash = 0;

  TransformedGrid grid() const { return TransformedGrid::make(problem.num_switches(), dthat); }
};

std::uint64_t fnv1a64(const std::string& text);

ProblemDocument parse_problem_document(const nlohmann::json& j);
ProblemDocument load_problem_document(const std::filesystem::path& path);

// "seed=<seed> config_hash=<hex>" - the provenance line every emitted file
// carries in a leading comment.
std::string provenance(std::uint64_t seed, std::uint64_t config_hash);

struct LoadedWeights {
  CostateNetwork net;
  std::uint64_t config_hash = 0;
};

// Structured text: header fields, the basis exponent table, then one
// full-precision weight block per step. Byte-stable for identical inputs.
void save_weights(std::ostream& os, const CostateNetwork& net, std::uint64_t config_hash);
void save_weights_file(const std::filesystem::path& path, const CostateNetwork& net,
                       std::uint64_t config_hash);
LoadedWeights load_weights(std::istream& is);
LoadedWeights load_weights_file(const std::filesystem::path& path);

// Throws ValidationError with a field-by-field account when the weights were
// trained against a different configuration.
void require_compatible(const LoadedWeights& weights, const ProblemDocument& doc);

// CSV "t1,..,tK,J,feasible".
void write_value_curve_csv(std::ostream& os, const ValueCurve& curve, int num_switches,
                           const std::string& header_comment);
// CSV "khat,iteration,frobenius_change,residual_rms" (inner-loop history).
void write_weight_history_csv(std::ostream& os, const TrainReport& report,
                              const std::string& header_comment);
// CSV "khat,that,norm,jump_from_prev,w_<row>_<col>..." (trained weights per step).
void write_weights_by_step_csv(std::ostream& os, const CostateNetwork& net,
                               const std::string& header_comment);
// Plain-text monomial list "coefficient,e1,...,ek" for a polynomial.
void write_poly_text(std::ostream& os, const PolynomialExpression& poly,
                     const std::vector<std::string>& names, const std::string& header_comment);

nlohmann::json train_report_json(const TrainReport& report);

// Joins relative paths onto $SWITCHTRACK_OUT when that override is set.
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

}  // namespace switchtrack
