#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "scatterlab/graph.hpp"

namespace scatterlab {

enum class CriterionId { asp, vertex_sum, edge_sum_j1, edge_sum_j2, quasi_equiv };
enum class Verdict { converging, diverging, inconclusive };

std::string to_string(CriterionId id);
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

// Nested vertex sets of a pair's top-level graphs. `first_level[x]` is the
// smallest level containing vertex x (indices refer to the pair).
struct Exhaustion {
  std::vector<int> levels;
  std::vector<Index> sizes;  // vertex count per level
  std::vector<int> first_level;

  int level_count() const { return static_cast<int>(levels.size()); }
};

// Throws GraphError when the truncations are not nested inside the pair or
// not nested in each other.
Exhaustion make_exhaustion(const GraphPair& pair,
                           const std::vector<WeightedGraph>& truncations);
// Single level covering the whole pair.
Exhaustion whole_graph_exhaustion(const GraphPair& pair);

struct CriterionReport {
  CriterionId id = CriterionId::vertex_sum;
  std::vector<std::pair<int, double>> partial_sums;
  Verdict verdict = Verdict::inconclusive;
  std::optional<double> tail_slope;  // absent when increments vanish
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  // "level,value" rows, shortest round-trip numbers.
  std::string to_csv() const;
};

// Verdict rule on partial sums of nonnegative terms:
//  - all of the last three increments at most 1e-13 * final sum, or the last
//    one at that floor with nonincreasing increments -> converging
//  - log-log slope of increments vs level size < -1 with strictly decreasing
//    increments -> converging
//  - slope >= -0.2 with positive increments (no decay) -> diverging
//  - otherwise, or with fewer than four levels, inconclusive.
// An infinite partial sum is diverging.
struct Classification {
  Verdict verdict;
  std::optional<double> slope;
};
Classification classify_partial_sums(const std::vector<double>& sums,
                                     const std::vector<Index>& sizes);

inline constexpr double kDivergingSlope = -0.2;

enum class PhiMode { exact, bound };
std::string to_string(PhiMode m);

// sum_x (1 - 1/rho(x))^2 phi_1(s,x) mu_1(x) over the exhaustion.
CriterionReport asp_partial_sum(const GraphPair& pair, const std::vector<double>& phi_values,
                                const Exhaustion& exhaustion, double s, PhiMode mode);

// sum_x |rho^{1/2} - rho^{-1/2}|.
CriterionReport vertex_sum(const GraphPair& pair, const Exhaustion& exhaustion);

// sum over ordered pairs of |rt^{1/2} - rt^{-1/2}| (1/mu_j(x) + 1/mu_j(y)) b_j(x,y).
CriterionReport edge_sum(const GraphPair& pair, int j, const Exhaustion& exhaustion);

// Passes (converging) iff a_mu <= a and a_b <= a on the truncation.
CriterionReport quasi_equivalence_check(const GraphPair& pair, double a);

// --- Pointwise metric comparison ----------------------------------------

class PencilError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Pointwise pencil A = g1 g2^{-1} in dimension m with its (positive) spectrum.
struct MetricPairSample {
  int dimension = 0;
  Eigen::MatrixXd pencil;
  std::vector<double> eigenvalues;

  // Spectrum through the Cholesky factor of g2 and a symmetric eigensolve.
  static MetricPairSample from_metrics(const Eigen::MatrixXd& g1,
                                       const Eigen::MatrixXd& g2);
  // A given directly in some basis; A must be diagonalizable with positive
  // real spectrum.
  static MetricPairSample from_pencil(const Eigen::MatrixXd& a);
  static MetricPairSample from_eigenvalues(const std::vector<double>& eigenvalues);
};

// 2 sinh((m/4) max |log lambda|).
double delta_from_pencil(const MetricPairSample& sample);

struct DistortionMargin {
  double lhs;  // |rho^{1/2} - rho^{-1/2}| with rho = det(A)^{-1/2}
  double rhs;  // delta
  bool holds() const { return lhs <= rhs + 1e-12; }
};
DistortionMargin distortion_margin(const MetricPairSample& sample);

}  // namespace scatterlab
