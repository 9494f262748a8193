#include "scatterlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace scatterlab {

WeightedGraph::WeightedGraph(std::vector<Label> labels, std::vector<double> mu,
                             std::vector<Edge> directed_edges,
                             int exhaustion_level)
    : labels_(std::move(labels)),
      mu_(std::move(mu)),
      exhaustion_level_(exhaustion_level) {
  const Index n = vertex_count();
  if (static_cast<Index>(mu_.size()) != n) {
    throw GraphError("measure has " + std::to_string(mu_.size()) +
                     " entries for " + std::to_string(n) + " vertices");
  }
  for (const Edge& e : directed_edges) {
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw GraphError("edge endpoint out of range");
    }
  }
  std::stable_sort(directed_edges.begin(), directed_edges.end(),
                   [](const Edge& a, const Edge& b) {
                     return a.from != b.from ? a.from < b.from : a.to < b.to;
                   });
  row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  cols_.reserve(directed_edges.size());
  weights_.reserve(directed_edges.size());
  for (const Edge& e : directed_edges) {
    ++row_ptr_[e.from + 1];
    cols_.push_back(e.to);
    weights_.push_back(e.weight);
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  row_sums_.resize(n);
  for (Index x = 0; x < n; ++x) {
    auto w = weights(x);
    row_sums_[x] = std::accumulate(w.begin(), w.end(), 0.0);
  }
  for (Index x = 0; x < n; ++x) label_index_.emplace(labels_[x], x);
}

double WeightedGraph::weight(Index x, Index y) const {
  auto nb = neighbors(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y);
  if (it == nb.end() || *it != y) return 0.0;
  return weights(x)[static_cast<std::size_t>(it - nb.begin())];
}

std::optional<Index> WeightedGraph::index_of(Label label) const {
  auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

WeightedGraph make_graph(std::vector<Label> labels, std::vector<double> mu,
                         const std::vector<LabeledEdge>& edges,
                         int exhaustion_level) {
  if (labels.size() != mu.size()) {
    throw GraphError("labels and mu differ in length");
  }
  std::map<Label, Index> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], static_cast<Index>(i)).second) {
      throw GraphError("duplicate vertex label " + std::to_string(labels[i]));
    }
    if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
      throw GraphError("nonpositive mu at vertex " + std::to_string(labels[i]));
    }
  }
  std::map<std::pair<Index, Index>, double> undirected;
  for (const LabeledEdge& e : edges) {
    auto ix = index.find(e.x);
    auto iy = index.find(e.y);
    if (ix == index.end() || iy == index.end()) {
      throw GraphError("edge (" + std::to_string(e.x) + "," +
                       std::to_string(e.y) + ") references an unknown vertex");
    }
    if (e.x == e.y) {
      throw GraphError("self loop at vertex " + std::to_string(e.x));
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw GraphError("invalid weight on edge (" + std::to_string(e.x) + "," +
                       std::to_string(e.y) + ")");
    }
    auto key = std::minmax(ix->second, iy->second);
    auto [it, inserted] = undirected.emplace(key, e.weight);
    if (!inserted && it->second != e.weight) {
      throw GraphError("non-symmetric edge list at (" + std::to_string(e.x) +
                       "," + std::to_string(e.y) + ")");
    }
  }
  std::vector<Edge> directed;
  directed.reserve(2 * undirected.size());
  for (const auto& [key, w] : undirected) {
    if (w == 0.0) continue;
    directed.push_back({key.first, key.second, w});
    directed.push_back({key.second, key.first, w});
  }
  return WeightedGraph(std::move(labels), std::move(mu), std::move(directed),
                       exhaustion_level);
}

ValidationReport validate(const WeightedGraph& g) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, Index x, Index y, std::string msg) {
    report.violations.push_back({kind, x, y, std::move(msg)});
  };
  const auto& labels = g.labels();
  auto name = [&](Index x) { return std::to_string(labels[x]); };

  std::set<Label> seen;
  for (Index x = 0; x < g.vertex_count(); ++x) {
    if (!seen.insert(labels[x]).second) {
      add(Violation::Kind::duplicate_label, x, x, "duplicate label " + name(x));
    }
    if (!(g.mu()[x] > 0.0)) {
      add(Violation::Kind::nonpositive_measure, x, x,
          "mu(" + name(x) + ") is not positive");
    }
    auto nb = g.neighbors(x);
    auto w = g.weights(x);
    double recomputed = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const Index y = nb[k];
      recomputed += w[k];
      if (y == x && w[k] != 0.0) {
        add(Violation::Kind::diagonal_weight, x, x,
            "b(" + name(x) + "," + name(x) + ") is nonzero");
      }
      if (w[k] < 0.0) {
        add(Violation::Kind::negative_weight, x, y,
            "b(" + name(x) + "," + name(y) + ") is negative");
      }
      if (g.weight(y, x) != w[k]) {
        add(Violation::Kind::asymmetric_weight, x, y,
            "b(" + name(x) + "," + name(y) + ") != b(" + name(y) + "," +
                name(x) + ")");
      }
    }
    const double stored = g.row_sum(x);
    if (std::abs(stored - recomputed) >
        1e-14 * std::max(std::abs(recomputed), 1e-300)) {
      add(Violation::Kind::row_sum_mismatch, x, x,
          "stored row sum of " + name(x) + " does not match its weights");
    }
  }
  return report;
}

// --- Profiles -----------------------------------------------------------

double Profile::operator()(Label n) const {
  const double a = std::abs(static_cast<double>(n));
  switch (kind) {
    case Kind::constant:
      return base;
    case Kind::geometric:
      return base + amplitude * std::pow(ratio, a);
    case Kind::algebraic:
      return base + amplitude / std::pow(1.0 + a, power);
    case Kind::linear:
      return base + slope * static_cast<double>(n);
    case Kind::finite: {
      auto it = overrides.find(n);
      return it == overrides.end() ? base : it->second;
    }
  }
  return base;
}

Profile Profile::constant(double value) {
  Profile p;
  p.kind = Kind::constant;
  p.base = value;
  return p;
}

Profile Profile::geometric(double base, double amplitude, double ratio) {
  Profile p;
  p.kind = Kind::geometric;
  p.base = base;
  p.amplitude = amplitude;
  p.ratio = ratio;
  return p;
}

Profile Profile::algebraic(double base, double amplitude, double power) {
  Profile p;
  p.kind = Kind::algebraic;
  p.base = base;
  p.amplitude = amplitude;
  p.power = power;
  return p;
}

Profile Profile::linear(double base, double slope) {
  Profile p;
  p.kind = Kind::linear;
  p.base = base;
  p.slope = slope;
  return p;
}

Profile Profile::finite(double base, std::map<Label, double> overrides) {
  Profile p;
  p.kind = Kind::finite;
  p.base = base;
  p.overrides = std::move(overrides);
  return p;
}

// --- Families -----------------------------------------------------------

int GraphFamilySpec::level_count() const {
  if (kind == Kind::single_vertex) return 1;
  if (kind == Kind::edge_list && radii.empty()) return 1;
  return static_cast<int>(radii.size());
}

namespace {

void check_radii(const GraphFamilySpec& family) {
  for (std::size_t i = 0; i < family.radii.size(); ++i) {
    if (family.radii[i] < 0) throw GraphError("negative truncation radius");
    if (i > 0 && family.radii[i] <= family.radii[i - 1]) {
      throw GraphError("truncation radii must be strictly increasing");
    }
  }
}

WeightedGraph build_interval(const GraphFamilySpec& family, Label lo, Label hi,
                             int level) {
  std::vector<Label> labels;
  std::vector<double> mu;
  std::vector<LabeledEdge> edges;
  for (Label n = lo; n <= hi; ++n) {
    labels.push_back(n);
    mu.push_back(family.mu(n));
    if (n < hi) edges.push_back({n, n + 1, family.b(n)});
  }
  return make_graph(std::move(labels), std::move(mu), edges, level);
}

WeightedGraph build_ball(const GraphFamilySpec& family, int level) {
  const WeightedGraph full =
      make_graph(family.labels, family.measure, family.edges, level);
  if (family.radii.empty()) return full;
  const auto root = full.index_of(family.root);
  if (!root) throw GraphError("edge-list root label is not a vertex");

  const Label radius = family.radii[static_cast<std::size_t>(level)];
  std::vector<Label> dist(static_cast<std::size_t>(full.vertex_count()), -1);
  std::deque<Index> queue{*root};
  dist[*root] = 0;
  while (!queue.empty()) {
    const Index x = queue.front();
    queue.pop_front();
    if (dist[x] == radius) continue;
    for (Index y : full.neighbors(x)) {
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  std::vector<Label> labels;
  std::vector<double> mu;
  for (Index x = 0; x < full.vertex_count(); ++x) {
    if (dist[x] >= 0) {
      labels.push_back(full.labels()[x]);
      mu.push_back(full.mu()[x]);
    }
  }
  std::vector<LabeledEdge> kept;
  for (const LabeledEdge& e : family.edges) {
    auto ix = full.index_of(e.x);
    auto iy = full.index_of(e.y);
    if (dist[*ix] >= 0 && dist[*iy] >= 0) kept.push_back(e);
  }
  return make_graph(std::move(labels), std::move(mu), kept, level);
}

}  // namespace

WeightedGraph build_truncation(const GraphFamilySpec& family, int level) {
  if (level < 0 || level >= family.level_count()) {
    throw GraphError("truncation level " + std::to_string(level) +
                     " outside the family schedule");
  }
  check_radii(family);
  switch (family.kind) {
    case GraphFamilySpec::Kind::single_vertex:
      return make_graph({0}, {family.mu(0)}, {}, level);
    case GraphFamilySpec::Kind::line: {
      const Label r = family.radii[static_cast<std::size_t>(level)];
      return build_interval(family, -r, r, level);
    }
    case GraphFamilySpec::Kind::half_line: {
      const Label r = family.radii[static_cast<std::size_t>(level)];
      return build_interval(family, 0, r, level);
    }
    case GraphFamilySpec::Kind::edge_list:
      return build_ball(family, level);
  }
  throw GraphError("unknown graph family");
}

// --- Pairs --------------------------------------------------------------

GraphPair pair_graphs(WeightedGraph g1, WeightedGraph g2) {
  if (g1.labels() != g2.labels()) {
    throw GraphError("graph pair requires identical vertex labels");
  }
  GraphPair pair;
  const Index n = g1.vertex_count();
  pair.rho.resize(n);
  double ratio_max = 1.0;
  for (Index x = 0; x < n; ++x) {
    const double r = g2.mu()[x] / g1.mu()[x];
    pair.rho[x] = r;
    ratio_max = std::max({ratio_max, r, 1.0 / r});
  }
  pair.a_mu = ratio_max;

  double b_max = 1.0;
  for (Index x = 0; x < n; ++x) {
    auto n1 = g1.neighbors(x);
    auto w1 = g1.weights(x);
    auto n2 = g2.neighbors(x);
    auto w2 = g2.weights(x);
    std::size_t i = 0, j = 0;
    while (i < n1.size() || j < n2.size()) {
      Index y;
      double b1 = 0.0, b2 = 0.0;
      if (j == n2.size() || (i < n1.size() && n1[i] < n2[j])) {
        y = n1[i];
        b1 = w1[i++];
      } else if (i == n1.size() || n2[j] < n1[i]) {
        y = n2[j];
        b2 = w2[j++];
      } else {
        y = n1[i];
        b1 = w1[i++];
        b2 = w2[j++];
      }
      if (y <= x) continue;
      const double rho_tilde = b2 != 0.0 ? b1 / b2 : 1.0;
      pair.edges.push_back({x, y, b1, b2, rho_tilde});
      if ((b1 == 0.0) != (b2 == 0.0)) {
        pair.supports_match = false;
      } else if (b1 != 0.0) {
        b_max = std::max({b_max, b2 / b1, b1 / b2});
      }
    }
  }
  pair.a_b = pair.supports_match ? b_max
                                 : std::numeric_limits<double>::infinity();
  pair.g1 = std::move(g1);
  pair.g2 = std::move(g2);
  return pair;
}

// --- Graph files --------------------------------------------------------

WeightedGraph graph_from_json(const nlohmann::json& j) {
  try {
    auto labels = j.at("labels").get<std::vector<Label>>();
    auto mu = j.at("mu").get<std::vector<double>>();
    std::vector<LabeledEdge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) {
        throw GraphError("edges must be [x, y, b] triples");
      }
      edges.push_back({e[0].get<Label>(), e[1].get<Label>(), e[2].get<double>()});
    }
    return make_graph(std::move(labels), std::move(mu), edges);
  } catch (const nlohmann::json::exception& ex) {
    throw GraphError(std::string("malformed graph file: ") + ex.what());
  }
}

nlohmann::json graph_to_json(const WeightedGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (Index x = 0; x < g.vertex_count(); ++x) {
    auto nb = g.neighbors(x);
    auto w = g.weights(x);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] > x) {
        edges.push_back({g.labels()[x], g.labels()[nb[k]], w[k]});
      }
    }
  }
  return {{"labels", g.labels()}, {"mu", g.mu()}, {"edges", edges}};
}

WeightedGraph read_graph_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open graph file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& ex) {
    throw GraphError("cannot parse " + path.string() + ": " + ex.what());
  }
  return graph_from_json(j);
}

void write_graph_file(const WeightedGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write graph file " + path.string());
  out << graph_to_json(g).dump(2) << '\n';
}

}  // namespace scatterlab
