#include "scatterlab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "scatterlab/format.hpp"

namespace scatterlab {

std::string to_string(CriterionId id) {
  switch (id) {
    case CriterionId::asp: return "asp";
    case CriterionId::vertex_sum: return "vertex_sum";
    case CriterionId::edge_sum_j1: return "edge_sum_j1";
    case CriterionId::edge_sum_j2: return "edge_sum_j2";
    case CriterionId::quasi_equiv: return "quasi_equiv";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::converging: return "converging";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "converging") return Verdict::converging;
  if (s == "diverging") return Verdict::diverging;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

std::string to_string(PhiMode m) { return m == PhiMode::exact ? "exact" : "bound"; }

Exhaustion make_exhaustion(const GraphPair& pair,
                           const std::vector<WeightedGraph>& truncations) {
  const Index n = pair.g1.vertex_count();
  Exhaustion ex;
  ex.first_level.assign(static_cast<std::size_t>(n), -1);
  Index previous = 0;
  for (std::size_t k = 0; k < truncations.size(); ++k) {
    const auto& g = truncations[k];
    Index covered = 0;
    for (Label label : g.labels()) {
      const auto idx = pair.g1.index_of(label);
      if (!idx) {
        throw GraphError("truncation vertex " + std::to_string(label) +
                         " is missing from the pair");
      }
      if (ex.first_level[*idx] < 0) ex.first_level[*idx] = static_cast<int>(k);
      ++covered;
    }
    // Nested iff every vertex seen at an earlier level is still present.
    Index earlier = 0;
    for (Label label : g.labels()) {
      if (ex.first_level[*pair.g1.index_of(label)] < static_cast<int>(k)) ++earlier;
    }
    if (earlier != previous) {
      throw GraphError("truncations are not nested at level " + std::to_string(k));
    }
    previous = covered;
    ex.levels.push_back(g.exhaustion_level());
    ex.sizes.push_back(covered);
  }
  return ex;
}

Exhaustion whole_graph_exhaustion(const GraphPair& pair) {
  Exhaustion ex;
  ex.levels = {0};
  ex.sizes = {pair.g1.vertex_count()};
  ex.first_level.assign(static_cast<std::size_t>(pair.g1.vertex_count()), 0);
  return ex;
}

nlohmann::json CriterionReport::to_json() const {
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& [level, value] : partial_sums) {
    sums.push_back({{"level", level},
                    {"value", std::isfinite(value) ? nlohmann::json(value)
                                                   : nlohmann::json(format_double(value))}});
  }
  return {{"criterion_id", to_string(id)},
          {"partial_sums", sums},
          {"verdict", to_string(verdict)},
          {"tail_slope", tail_slope ? nlohmann::json(*tail_slope) : nlohmann::json()},
          {"parameters", parameters},
          {"notes", notes}};
}

std::string CriterionReport::to_csv() const {
  std::ostringstream out;
  out << "level,value\n";
  for (const auto& [level, value] : partial_sums) {
    out << level << ',' << format_double(value) << '\n';
  }
  return out.str();
}

Classification classify_partial_sums(const std::vector<double>& sums,
                                     const std::vector<Index>& sizes) {
  if (!sums.empty() && std::isinf(sums.back())) {
    return {Verdict::diverging, std::nullopt};
  }
  if (std::all_of(sums.begin(), sums.end(), [](double v) { return v == 0.0; })) {
    return {Verdict::converging, std::nullopt};
  }
  if (sums.size() < 4) return {Verdict::inconclusive, std::nullopt};

  const std::size_t last = sums.size() - 1;
  double inc[3];
  double x[3];
  for (int i = 0; i < 3; ++i) {
    const std::size_t k = last - 2 + i;
    inc[i] = sums[k] - sums[k - 1];
    x[i] = std::log(static_cast<double>(sizes[k]));
  }
  const double floor = 1e-13 * sums.back();
  if (inc[0] <= floor && inc[1] <= floor && inc[2] <= floor) {
    return {Verdict::converging, std::nullopt};
  }
  // Tail decayed into round-off: fast decay that no longer fits a power law.
  if (inc[2] <= floor && inc[0] >= inc[1] && inc[1] >= inc[2]) {
    return {Verdict::converging, std::nullopt};
  }
  if (inc[0] <= 0.0 || inc[1] <= 0.0 || inc[2] <= 0.0) {
    return {Verdict::inconclusive, std::nullopt};
  }
  double y[3];
  for (int i = 0; i < 3; ++i) y[i] = std::log(inc[i]);
  const double xm = (x[0] + x[1] + x[2]) / 3.0;
  const double ym = (y[0] + y[1] + y[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  if (sxx == 0.0) return {Verdict::inconclusive, std::nullopt};
  const double slope = sxy / sxx;
  if (slope < -1.0 && inc[0] > inc[1] && inc[1] > inc[2]) {
    return {Verdict::converging, slope};
  }
  if (slope >= kDivergingSlope) return {Verdict::diverging, slope};
  return {Verdict::inconclusive, slope};
}

namespace {

// Accumulates per-vertex terms level by level so partial sums are exactly
// nondecreasing for nonnegative terms.
std::vector<double> level_sums(const Exhaustion& ex, const std::vector<double>& terms) {
  std::vector<double> increments(static_cast<std::size_t>(ex.level_count()), 0.0);
  for (std::size_t x = 0; x < terms.size(); ++x) {
    const int level = ex.first_level[x];
    if (level >= 0) increments[level] += terms[x];
  }
  std::vector<double> sums(increments.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    acc += increments[k];
    sums[k] = acc;
  }
  return sums;
}

CriterionReport finish(CriterionId id, const Exhaustion& ex, std::vector<double> sums) {
  CriterionReport report;
  report.id = id;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    report.partial_sums.emplace_back(ex.levels[k], sums[k]);
  }
  const auto c = classify_partial_sums(sums, ex.sizes);
  report.verdict = c.verdict;
  report.tail_slope = c.slope;
  report.parameters["level_sizes"] = ex.sizes;
  return report;
}

double sym_gap(double r) { return std::abs(std::sqrt(r) - 1.0 / std::sqrt(r)); }

}  // namespace

CriterionReport asp_partial_sum(const GraphPair& pair, const std::vector<double>& phi_values,
                                const Exhaustion& exhaustion, double s, PhiMode mode) {
  const Index n = pair.g1.vertex_count();
  if (static_cast<Index>(phi_values.size()) != n) {
    throw std::invalid_argument("phi values missing: expected " + std::to_string(n) +
                                " entries, got " + std::to_string(phi_values.size()));
  }
  std::vector<double> terms(static_cast<std::size_t>(n), 0.0);
  for (Index x = 0; x < n; ++x) {
    if (exhaustion.first_level[x] < 0) continue;
    if (!std::isfinite(phi_values[x]) || phi_values[x] < 0.0) {
      throw std::invalid_argument("missing phi value for vertex " +
                                  std::to_string(pair.g1.labels()[x]));
    }
    const double d = 1.0 - 1.0 / pair.rho[x];
    terms[x] = d * d * phi_values[x] * pair.g1.mu()[x];
  }
  auto report = finish(CriterionId::asp, exhaustion, level_sums(exhaustion, terms));
  report.parameters["s"] = s;
  report.parameters["phi_mode"] = to_string(mode);
  return report;
}

CriterionReport vertex_sum(const GraphPair& pair, const Exhaustion& exhaustion) {
  std::vector<double> terms(pair.rho.size());
  for (std::size_t x = 0; x < terms.size(); ++x) terms[x] = sym_gap(pair.rho[x]);
  return finish(CriterionId::vertex_sum, exhaustion, level_sums(exhaustion, terms));
}

CriterionReport edge_sum(const GraphPair& pair, int j, const Exhaustion& exhaustion) {
  if (j != 1 && j != 2) throw std::invalid_argument("edge_sum index must be 1 or 2");
  const auto& g = j == 1 ? pair.g1 : pair.g2;
  const auto& mu = g.mu();
  std::vector<double> increments(static_cast<std::size_t>(exhaustion.level_count()), 0.0);
  for (const PairEdge& e : pair.edges) {
    const int lx = exhaustion.first_level[e.x];
    const int ly = exhaustion.first_level[e.y];
    if (lx < 0 || ly < 0) continue;
    const double b = j == 1 ? e.b1 : e.b2;
    if (b == 0.0) continue;
    const double gap = e.rho_tilde == 0.0 ? std::numeric_limits<double>::infinity()
                                          : sym_gap(e.rho_tilde);
    // Both orders of the unordered pair; the term is symmetric.
    increments[std::max(lx, ly)] += 2.0 * gap * (1.0 / mu[e.x] + 1.0 / mu[e.y]) * b;
  }
  std::vector<double> sums(increments.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < sums.size(); ++k) sums[k] = (acc += increments[k]);
  auto report = finish(j == 1 ? CriterionId::edge_sum_j1 : CriterionId::edge_sum_j2,
                       exhaustion, std::move(sums));
  report.parameters["j"] = j;
  return report;
}

CriterionReport quasi_equivalence_check(const GraphPair& pair, double a) {
  if (!(a >= 1.0)) throw std::invalid_argument("quasi-equivalence threshold must be >= 1");
  CriterionReport report;
  report.id = CriterionId::quasi_equiv;
  const bool pass = pair.a_mu <= a && pair.a_b <= a;
  report.verdict = pass ? Verdict::converging : Verdict::diverging;
  report.parameters["threshold"] = a;
  report.parameters["a_mu"] = pair.a_mu;
  report.parameters["a_b"] = std::isfinite(pair.a_b) ? nlohmann::json(pair.a_b)
                                                      : nlohmann::json("inf");
  report.parameters["supports_match"] = pair.supports_match;
  report.notes.push_back(
      "constants are computed on the truncation and are lower bounds for the "
      "infinite graphs");
  return report;
}

// --- Pencils ---------------------------------------------------------------

namespace {

void check_spectrum(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) throw PencilError("pencil has dimension zero");
  for (double l : eigenvalues) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw PencilError("pencil is not positive definite");
    }
  }
}

}  // namespace

MetricPairSample MetricPairSample::from_metrics(const Eigen::MatrixXd& g1,
                                                const Eigen::MatrixXd& g2) {
  if (g1.rows() != g1.cols() || g2.rows() != g2.cols() || g1.rows() != g2.rows()) {
    throw PencilError("metric tensors must be square of equal size");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g2);
  if (llt.info() != Eigen::Success) throw PencilError("g2 is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  // spec(g1 g2^{-1}) = spec(L^{-1} g1 L^{-T}) for g2 = L L^T.
  Eigen::MatrixXd reduced = l.triangularView<Eigen::Lower>().solve(g1);
  reduced = l.triangularView<Eigen::Lower>().solve(reduced.transpose()).transpose();
  reduced = 0.5 * (reduced + reduced.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
  MetricPairSample sample;
  sample.dimension = static_cast<int>(g1.rows());
  sample.pencil = g1 * g2.inverse();
  const auto& ev = solver.eigenvalues();
  sample.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  check_spectrum(sample.eigenvalues);
  return sample;
}

MetricPairSample MetricPairSample::from_pencil(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw PencilError("pencil must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw PencilError("pencil eigensolve failed");
  MetricPairSample sample;
  sample.dimension = static_cast<int>(a.rows());
  sample.pencil = a;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (const auto& l : solver.eigenvalues()) {
    if (std::abs(l.imag()) > 1e-10 * scale) {
      throw PencilError("pencil has non-real eigenvalues");
    }
    sample.eigenvalues.push_back(l.real());
  }
  std::sort(sample.eigenvalues.begin(), sample.eigenvalues.end());
  check_spectrum(sample.eigenvalues);
  return sample;
}

MetricPairSample MetricPairSample::from_eigenvalues(const std::vector<double>& eigenvalues) {
  check_spectrum(eigenvalues);
  MetricPairSample sample;
  sample.dimension = static_cast<int>(eigenvalues.size());
  sample.pencil = Eigen::VectorXd::Map(eigenvalues.data(),
                                       static_cast<Eigen::Index>(eigenvalues.size()))
                      .asDiagonal();
  sample.eigenvalues = eigenvalues;
  return sample;
}

double delta_from_pencil(const MetricPairSample& sample) {
  check_spectrum(sample.eigenvalues);
  double spread = 0.0;
  for (double l : sample.eigenvalues) spread = std::max(spread, std::abs(std::log(l)));
  return 2.0 * std::sinh(sample.dimension / 4.0 * spread);
}

DistortionMargin distortion_margin(const MetricPairSample& sample) {
  check_spectrum(sample.eigenvalues);
  double log_det = 0.0;
  for (double l : sample.eigenvalues) log_det += std::log(l);
  // rho = det(A)^{-1/2}; |rho^{1/2} - rho^{-1/2}| = 2 sinh(|log rho| / 2).
  const double log_rho = -0.5 * log_det;
  return {2.0 * std::sinh(0.5 * std::abs(log_rho)), delta_from_pencil(sample)};
}

}  // namespace scatterlab
