#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "scatterlab/graph.hpp"

using namespace scatterlab;

namespace {

GraphFamilySpec line(std::vector<Label> radii, Profile b = Profile::constant(1.0),
                     Profile mu = Profile::constant(1.0)) {
  GraphFamilySpec f;
  f.kind = GraphFamilySpec::Kind::line;
  f.radii = std::move(radii);
  f.b = std::move(b);
  f.mu = std::move(mu);
  return f;
}

}  // namespace

TEST_CASE("line truncation at radius 2") {
  const auto g = build_truncation(line({2}), 0);
  CHECK(g.vertex_count() == 5);
  CHECK(g.labels() == std::vector<Label>{-2, -1, 0, 1, 2});
  CHECK(g.edge_entry_count() == 8);  // 4 undirected edges
  for (Label n = -2; n < 2; ++n) {
    CHECK(g.weight(*g.index_of(n), *g.index_of(n + 1)) == 1.0);
  }
  CHECK(validate(g).ok());
}

TEST_CASE("single vertex family") {
  GraphFamilySpec f;
  f.kind = GraphFamilySpec::Kind::single_vertex;
  const auto g = build_truncation(f, 0);
  CHECK(g.vertex_count() == 1);
  CHECK(g.edge_entry_count() == 0);
  CHECK(g.row_sum(0) == 0.0);
}

TEST_CASE("half line with growing weights") {
  GraphFamilySpec f;
  f.kind = GraphFamilySpec::Kind::half_line;
  f.radii = {3};
  f.b = Profile::linear(1.0, 1.0);  // b(n, n+1) = n + 1
  const auto g = build_truncation(f, 0);
  CHECK(g.vertex_count() == 4);
  CHECK(g.weight(0, 1) == 1.0);
  CHECK(g.weight(1, 2) == 2.0);
  CHECK(g.weight(2, 3) == 3.0);
  CHECK(g.weight(3, 2) == 3.0);
}

TEST_CASE("truncations are nested with unmodified weights") {
  const auto f = line({1, 3, 7, 20}, Profile::geometric(1.0, 2.0, 0.5),
                      Profile::algebraic(1.0, 1.0, 1.0));
  for (int k = 0; k + 1 < f.level_count(); ++k) {
    const auto small = build_truncation(f, k);
    const auto big = build_truncation(f, k + 1);
    CHECK(small.exhaustion_level() == k);
    for (Index x = 0; x < small.vertex_count(); ++x) {
      const auto bx = big.index_of(small.labels()[x]);
      REQUIRE(bx.has_value());
      CHECK(big.mu()[*bx] == small.mu()[x]);
      for (Index y : small.neighbors(x)) {
        CHECK(big.weight(*bx, *big.index_of(small.labels()[y])) == small.weight(x, y));
      }
    }
  }
}

TEST_CASE("edge-list family truncates hop balls around the root") {
  GraphFamilySpec f;
  f.kind = GraphFamilySpec::Kind::edge_list;
  f.labels = {10, 20, 30, 40};
  f.measure = {1.0, 2.0, 1.0, 1.0};
  f.edges = {{10, 20, 1.0}, {20, 30, 2.0}, {30, 40, 0.5}, {10, 40, 3.0}};
  f.root = 10;
  f.radii = {0, 1, 2};
  CHECK(build_truncation(f, 0).labels() == std::vector<Label>{10});
  const auto g1 = build_truncation(f, 1);
  CHECK(g1.labels() == std::vector<Label>{10, 20, 40});
  CHECK(g1.weight(*g1.index_of(10), *g1.index_of(40)) == 3.0);
  CHECK(build_truncation(f, 2).vertex_count() == 4);
}

TEST_CASE("build errors") {
  CHECK_THROWS_AS(build_truncation(line({2}), 1), GraphError);
  CHECK_THROWS_AS(build_truncation(line({2, 2}), 0), GraphError);
  CHECK_THROWS_AS(build_truncation(line({2}, Profile::constant(1.0), Profile::constant(-1.0)), 0),
                  GraphError);
  CHECK_THROWS_AS(make_graph({1, 2}, {1.0, 1.0}, {{1, 2, 1.0}, {2, 1, 2.0}}), GraphError);
  CHECK_THROWS_AS(make_graph({1, 1}, {1.0, 1.0}, {}), GraphError);
  CHECK_THROWS_AS(make_graph({1}, {1.0}, {{1, 1, 1.0}}), GraphError);
  CHECK_THROWS_AS(make_graph({1}, {1.0}, {{1, 5, 1.0}}), GraphError);
  // A repeated edge with the same weight is accepted.
  CHECK(make_graph({1, 2}, {1.0, 1.0}, {{1, 2, 1.0}, {2, 1, 1.0}}).edge_entry_count() == 2);
}

TEST_CASE("validate reports violations with indices") {
  CHECK(validate(build_truncation(line({5}), 0)).ok());

  SUBCASE("asymmetric weight") {
    const WeightedGraph g({1, 2}, {1.0, 1.0}, {{0, 1, 1.0}});
    const auto r = validate(g);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == Violation::Kind::asymmetric_weight);
    CHECK(r.violations[0].x == 0);
    CHECK(r.violations[0].y == 1);
  }
  SUBCASE("nonpositive measure") {
    const WeightedGraph g({1, 2, 3}, {1.0, 1.0, 0.0}, {});
    const auto r = validate(g);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == Violation::Kind::nonpositive_measure);
    CHECK(r.violations[0].x == 2);
  }
  SUBCASE("diagonal and negative weights") {
    const WeightedGraph g({1, 2}, {1.0, 1.0}, {{0, 0, 1.0}, {0, 1, -1.0}, {1, 0, -1.0}});
    const auto r = validate(g);
    int diagonal = 0, negative = 0;
    for (const auto& v : r.violations) {
      diagonal += v.kind == Violation::Kind::diagonal_weight;
      negative += v.kind == Violation::Kind::negative_weight;
    }
    CHECK(diagonal == 1);
    CHECK(negative == 2);
  }
}

TEST_CASE("pair of identical graphs") {
  const auto g = build_truncation(line({4}, Profile::geometric(1.0, 1.0, 0.5)), 0);
  const auto p = pair_graphs(g, g);
  for (double r : p.rho) CHECK(r == 1.0);
  for (const auto& e : p.edges) CHECK(e.rho_tilde == 1.0);
  CHECK(p.a_mu == 1.0);
  CHECK(p.a_b == 1.0);
}

TEST_CASE("pair with doubled measure") {
  const auto g1 = build_truncation(line({3}), 0);
  const auto g2 = build_truncation(line({3}, Profile::constant(1.0), Profile::constant(2.0)), 0);
  const auto p = pair_graphs(g1, g2);
  for (double r : p.rho) CHECK(r == 2.0);
  CHECK(p.a_mu == 2.0);
  CHECK(p.a_b == 1.0);
}

TEST_CASE("support mismatch flags a_b as infinite") {
  const auto g1 = make_graph({0, 1, 2}, {1, 1, 1}, {{0, 1, 3.0}, {1, 2, 1.0}});
  const auto g2 = make_graph({0, 1, 2}, {1, 1, 1}, {{1, 2, 1.0}});
  const auto p = pair_graphs(g1, g2);
  CHECK_FALSE(p.supports_match);
  CHECK(std::isinf(p.a_b));
  // b2 = 0 there, so rho_tilde falls back to 1.
  CHECK(p.edges[0].rho_tilde == 1.0);
}

TEST_CASE("pair invariants on a perturbed line") {
  const auto g1 = build_truncation(line({30}, Profile::constant(1.0), Profile::constant(1.5)), 0);
  const auto g2 = build_truncation(
      line({30}, Profile::finite(1.0, {{0, 4.0}, {3, 0.25}}), Profile::algebraic(1.0, 2.0, 1.0)),
      0);
  const auto p = pair_graphs(g1, g2);
  bool attained = false;
  for (Index x = 0; x < g1.vertex_count(); ++x) {
    CHECK(std::abs(p.rho[x] * g1.mu()[x] - g2.mu()[x]) <= 1e-14 * g2.mu()[x]);
    CHECK(g2.mu()[x] <= p.a_mu * g1.mu()[x] * (1 + 1e-15));
    CHECK(g1.mu()[x] <= p.a_mu * g2.mu()[x] * (1 + 1e-15));
    CHECK(p.rho[x] >= 1.0 / p.a_mu * (1 - 1e-15));
    attained = attained || p.rho[x] == p.a_mu || 1.0 / p.rho[x] == p.a_mu;
  }
  CHECK(attained);
  CHECK(p.a_b == 4.0);
  for (const auto& e : p.edges) CHECK(e.rho_tilde == doctest::Approx(e.b1 / e.b2));
}

TEST_CASE("pairing graphs with different labels fails") {
  const auto a = build_truncation(line({2}), 0);
  const auto b = build_truncation(line({3}), 0);
  CHECK_THROWS_AS(pair_graphs(a, b), GraphError);
}

TEST_CASE("graph file round trip and symmetrization") {
  const auto dir = std::filesystem::temp_directory_path() / "scatterlab_graph_test";
  std::filesystem::create_directories(dir);
  const auto g = build_truncation(line({3}, Profile::linear(2.0, 0.5), Profile::constant(0.5)), 0);
  write_graph_file(g, dir / "g.json");
  const auto back = read_graph_file(dir / "g.json");
  CHECK(back.labels() == g.labels());
  CHECK(back.mu() == g.mu());
  CHECK(back.all_weights() == g.all_weights());

  const auto j = nlohmann::json::parse(R"({"labels":[1,2,3],"mu":[1,2,3],"edges":[[1,2,0.5],[3,2,1.5]]})");
  const auto h = graph_from_json(j);
  CHECK(h.weight(*h.index_of(2), *h.index_of(3)) == 1.5);
  CHECK(h.weight(*h.index_of(3), *h.index_of(2)) == 1.5);
  CHECK(validate(h).ok());

  CHECK_THROWS_AS(
      graph_from_json(nlohmann::json::parse(R"({"labels":[1,2],"mu":[1,1],"edges":[[1,2,1],[2,1,2]]})")),
      GraphError);
  CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"labels":[1,2],"mu":[1,0],"edges":[]})")),
                  GraphError);
  CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"labels":[1]})")), GraphError);
  std::filesystem::remove_all(dir);
}
