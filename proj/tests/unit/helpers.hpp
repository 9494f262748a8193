#pragma once

#include <random>

#include "scatterlab/graph.hpp"
#include "scatterlab/laplacian.hpp"
#include "scatterlab/random.hpp"

namespace scatterlab::testing {

inline GraphFamilySpec line_family(std::vector<Label> radii, Profile b = Profile::constant(1.0),
                                   Profile mu = Profile::constant(1.0)) {
  GraphFamilySpec f;
  f.kind = GraphFamilySpec::Kind::line;
  f.radii = std::move(radii);
  f.b = std::move(b);
  f.mu = std::move(mu);
  return f;
}

inline WeightedGraph line_graph(Label radius, Profile b = Profile::constant(1.0),
                                Profile mu = Profile::constant(1.0)) {
  return build_truncation(line_family({radius}, std::move(b), std::move(mu)), 0);
}

// Random connected-ish graph: a path plus a few chords, weights and measure
// drawn from [0.1, 2.1).
inline WeightedGraph random_graph(int n, std::mt19937_64& rng) {
  std::vector<Label> labels(n);
  std::vector<double> mu(n);
  std::vector<LabeledEdge> edges;
  for (int i = 0; i < n; ++i) {
    labels[i] = i;
    mu[i] = 0.1 + 2.0 * uniform01(rng);
    if (i + 1 < n) edges.push_back({i, i + 1, 0.1 + 2.0 * uniform01(rng)});
  }
  for (int k = 0; k < n / 2; ++k) {
    const Label a = static_cast<Label>(uniform01(rng) * n);
    const Label b = static_cast<Label>(uniform01(rng) * n);
    if (std::abs(a - b) > 1) edges.push_back({std::min(a, b), std::max(a, b), 0.1 + uniform01(rng)});
  }
  // Drop repeated chords so the weights stay consistent.
  std::sort(edges.begin(), edges.end(), [](const auto& l, const auto& r) {
    return std::tie(l.x, l.y) < std::tie(r.x, r.y);
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const auto& l, const auto& r) { return l.x == r.x && l.y == r.y; }),
              edges.end());
  return make_graph(labels, mu, edges);
}

inline double max_abs_diff(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace scatterlab::testing
