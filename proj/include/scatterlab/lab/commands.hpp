#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatterlab/lab/config.hpp"
#include "scatterlab/scattering.hpp"

namespace scatterlab::lab {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitInconsistent = 3,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  int jobs = 1;
  std::uint64_t seed = 20240607;
  std::optional<std::vector<double>> s_values;
  bool both_signs = false;
};

// SCATTERLAB_OUT, then --out, then the config's "output", then
// "scatterlab-out".
std::filesystem::path resolve_output_dir(const CommandOptions& opts, const RunConfig& cfg);

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_criteria(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_scatter(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

// Combines criteria verdicts into a prediction:
//  - equivalent when the vertex/edge sums all converge and the quasi check
//    passes, or when the phi-weighted sum converges for every s;
//  - not_equivalent when the phi-weighted sum diverges for every s and the
//    vertex sum diverges (heuristic: the theorems are one-directional);
//  - inconclusive otherwise.
Equivalence criteria_prediction(const nlohmann::json& criteria_summary);
// Combined simulation verdict over packets.
Equivalence aggregate_simulation(const std::vector<Equivalence>& verdicts);
// False only when one side says equivalent and the other not_equivalent.
bool verdicts_agree(Equivalence predicted, Equivalence simulated);

// Operator invariant spot checks on random states from `seed`.
struct OperatorChecks {
  double self_adjoint_rel_error = 0.0;
  double min_form_ratio = 0.0;
  double form_identity_rel_error = 0.0;
  double j_unitarity_rel_error = 0.0;
  nlohmann::json to_json() const;
};
OperatorChecks operator_checks(const GraphPair& pair, const LaplacianOperator& h1,
                               std::uint64_t seed, int samples);

}  // namespace scatterlab::lab
