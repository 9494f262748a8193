#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatterlab/criteria.hpp"
#include "scatterlab/graph.hpp"

namespace scatterlab::lab {

// Parse or schema error, tagged with the JSON path of the offending field
// (e.g. "scenarios[2].g1.mu.value") or a line:column for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct PacketSpec {
  double k = 0.0;
  Label n0 = 0;
  double sigma = 1.0;
};

struct TimeGridSpec {
  enum class Kind { geometric, list };
  Kind kind = Kind::geometric;
  // geometric: t_max, or fraction_of_reflection * reflection time of the packet
  std::optional<double> t_max;
  double fraction_of_reflection = 0.8;
  std::vector<double> times;  // list
};

struct CriteriaSpec {
  std::vector<double> s_values{0.25, 0.5, 0.75};
  PhiMode phi_mode = PhiMode::exact;
  double quasi_threshold = 10.0;
  double eps_eq = 0.05;
  double cauchy_tol = 1e-3;
  // Spectral window half-width l as a fraction of lambda_max.
  double filter_fraction = 0.75;
};

struct ScenarioConfig {
  std::string id;
  GraphFamilySpec g1;
  GraphFamilySpec g2;
  std::vector<int> levels;
  std::vector<PacketSpec> packets;
  TimeGridSpec time_grid;
  CriteriaSpec criteria;
};

struct RunConfig {
  std::vector<ScenarioConfig> scenarios;
  std::optional<std::string> output_dir;
};

// `base` resolves relative graph_file paths.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = {});
RunConfig load_config(const std::filesystem::path& path);

// Builds level k of the scenario's g1/g2; GraphError is rethrown as a
// ConfigError naming the family's path.
WeightedGraph build_level(const ScenarioConfig& scenario, int which, int level,
                          std::size_t scenario_index);

}  // namespace scatterlab::lab
