#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace scatterlab {

using Label = std::int64_t;
using Index = std::int32_t;

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One directed entry of the adjacency. A valid graph stores both (x,y) and (y,x).
struct Edge {
  Index from;
  Index to;
  double weight;
};

// Finite truncation of a weighted infinite graph (X, b, mu).
//
// Adjacency is kept in compressed rows; the raw constructor does not enforce
// the graph axioms so that `validate` can report on arbitrary input. Builders
// (`make_graph`, `build_truncation`, `read_graph_json`) always return graphs
// for which `validate` is empty.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::vector<Label> labels, std::vector<double> mu,
                std::vector<Edge> directed_edges, int exhaustion_level = 0);

  Index vertex_count() const { return static_cast<Index>(labels_.size()); }
  const std::vector<Label>& labels() const { return labels_; }
  const std::vector<double>& mu() const { return mu_; }
  int exhaustion_level() const { return exhaustion_level_; }

  std::span<const Index> neighbors(Index x) const {
    return {cols_.data() + row_ptr_[x], cols_.data() + row_ptr_[x + 1]};
  }
  std::span<const double> weights(Index x) const {
    return {weights_.data() + row_ptr_[x], weights_.data() + row_ptr_[x + 1]};
  }
  // Stored sum_y b(x,y).
  double row_sum(Index x) const { return row_sums_[x]; }
  // b(x,y); zero when absent.
  double weight(Index x, Index y) const;

  std::optional<Index> index_of(Label label) const;
  Index edge_entry_count() const { return static_cast<Index>(cols_.size()); }

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& cols() const { return cols_; }
  const std::vector<double>& all_weights() const { return weights_; }

 private:
  std::vector<Label> labels_;
  std::vector<double> mu_;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> weights_;
  std::vector<double> row_sums_;
  std::map<Label, Index> label_index_;
  int exhaustion_level_ = 0;
};

// Undirected edge given by labels, stored once per unordered pair.
struct LabeledEdge {
  Label x;
  Label y;
  double weight;
};

// Builds a valid graph from an undirected edge list; throws GraphError on
// duplicate labels, unknown endpoints, self loops, negative weights,
// conflicting duplicate edges or nonpositive mu.
WeightedGraph make_graph(std::vector<Label> labels, std::vector<double> mu,
                         const std::vector<LabeledEdge>& edges,
                         int exhaustion_level = 0);

struct Violation {
  enum class Kind { asymmetric_weight, diagonal_weight, negative_weight,
                    nonpositive_measure, row_sum_mismatch, duplicate_label };
  Kind kind;
  Index x;
  Index y;  // equals x for vertex-local violations
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const WeightedGraph& g);

// --- Families and truncations -------------------------------------------

// Site-dependent parameter used for b and mu. For edge weights on ordered
// families the profile is evaluated at the smaller endpoint label, so
// b(n, n+1) = profile(n).
struct Profile {
  enum class Kind { constant, geometric, algebraic, linear, finite };
  Kind kind = Kind::constant;
  double base = 1.0;       // constant value / offset
  double amplitude = 0.0;  // geometric, algebraic
  double ratio = 0.5;      // geometric: base + amplitude * ratio^|n|
  double power = 1.0;      // algebraic: base + amplitude / (1+|n|)^power
  double slope = 0.0;      // linear: base + slope * n
  std::map<Label, double> overrides;  // finite: base except listed sites

  double operator()(Label n) const;

  static Profile constant(double value);
  static Profile geometric(double base, double amplitude, double ratio);
  static Profile algebraic(double base, double amplitude, double power);
  static Profile linear(double base, double slope);
  static Profile finite(double base, std::map<Label, double> overrides);
};

struct GraphFamilySpec {
  enum class Kind { line, half_line, single_vertex, edge_list };
  Kind kind = Kind::line;
  // Radius of each level: line -> labels [-R, R], half_line -> [0, R],
  // edge_list -> hop distance from `root`. Must be strictly increasing.
  std::vector<Label> radii;
  Profile b = Profile::constant(1.0);
  Profile mu = Profile::constant(1.0);
  // edge_list only: the full graph; truncation keeps a hop ball around root.
  std::vector<Label> labels;
  std::vector<double> measure;
  std::vector<LabeledEdge> edges;
  Label root = 0;

  int level_count() const;
};

WeightedGraph build_truncation(const GraphFamilySpec& family, int level);

// --- Pairs ---------------------------------------------------------------

// Unordered pair (x < y) in the union of both edge supports.
struct PairEdge {
  Index x;
  Index y;
  double b1;
  double b2;
  double rho_tilde;  // b1/b2 where b2 != 0, else 1
};

struct GraphPair {
  WeightedGraph g1;
  WeightedGraph g2;
  std::vector<double> rho;  // mu2 / mu1
  std::vector<PairEdge> edges;
  double a_mu = 1.0;
  double a_b = 1.0;  // +infinity when edge supports differ
  bool supports_match = true;
};

GraphPair pair_graphs(WeightedGraph g1, WeightedGraph g2);

// --- Graph files ---------------------------------------------------------

// Format: {"labels": [...], "mu": [...], "edges": [[x, y, b], ...]} with
// each unordered pair listed once.
WeightedGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const WeightedGraph& g);
WeightedGraph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const WeightedGraph& g, const std::filesystem::path& path);

}  // namespace scatterlab
