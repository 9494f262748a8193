// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "scatterlab/criteria.hpp"
#include "scatterlab/lab/commands.hpp"
#include "scatterlab/lab/config.hpp"
#include "scatterlab/propagation.hpp"
#include "scatterlab/random.hpp"
#include "scatterlab/scattering.hpp"

using namespace scatterlab;
namespace fs = std::filesystem;

namespace {

const fs::path kBundled = SCATTERLAB_DATA_DIR "/scenarios/bundled.json";
constexpr std::uint64_t kMasterSeed = 20240607;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Scenario {
  lab::ScenarioConfig cfg;
  std::vector<WeightedGraph> levels1;
  std::vector<WeightedGraph> levels2;
  GraphPair pair;
  Exhaustion exhaustion;
};

std::vector<Scenario> load_bundled() {
  const auto run = lab::load_config(kBundled);
  std::vector<Scenario> out;
  for (std::size_t i = 0; i < run.scenarios.size(); ++i) {
    Scenario s;
    s.cfg = run.scenarios[i];
    for (int level : s.cfg.levels) {
      s.levels1.push_back(lab::build_level(s.cfg, 1, level, i));
      s.levels2.push_back(lab::build_level(s.cfg, 2, level, i));
    }
    s.pair = pair_graphs(s.levels1.back(), s.levels2.back());
    s.exhaustion = make_exhaustion(s.pair, s.levels1);
    out.push_back(std::move(s));
  }
  return out;
}

const Scenario& find(const std::vector<Scenario>& all, const std::string& id) {
  for (const auto& s : all) {
    if (s.cfg.id == id) return s;
  }
  throw std::runtime_error("bundled suite has no scenario " + id);
}

// Every distinct graph of the suite: each level of g1 and g2.
std::vector<const WeightedGraph*> all_graphs(const std::vector<Scenario>& all) {
  std::vector<const WeightedGraph*> out;
  for (const auto& s : all) {
    for (const auto& g : s.levels1) out.push_back(&g);
    for (const auto& g : s.levels2) out.push_back(&g);
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs_diff(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome operator_correctness(const std::vector<Scenario>& all) {
  Outcome o;
  double worst = 0.0, slowest = 0.0;
  int graphs = 0;
  std::mt19937_64 rng(kMasterSeed);
  for (const auto* g : all_graphs(all)) {
    if (g->vertex_count() > 200) continue;
    const auto start = Clock::now();
    const LaplacianOperator h(*g);
    const SpectralDecomposition dense(h);
    const auto psi = random_state(g->vertex_count(), rng);
    for (double s : {0.1, 1.0}) {
      const auto ref = dense.apply([s](double l) { return Complex(std::exp(-s * l), 0.0); }, psi);
      worst = std::max(worst, max_abs_diff(heat_apply(h, s, psi), ref));
    }
    for (double t : {1.0, 10.0, 100.0}) {
      const auto ref = dense.apply([t](double l) { return std::exp(Complex(0.0, -t * l)); }, psi);
      worst = std::max(worst, max_abs_diff(evolve(h, t, psi), ref));
    }
    slowest = std::max(slowest, seconds_since(start));
    ++graphs;
  }
  o.pass = graphs > 0 && worst <= 1e-9 && slowest < 10.0;
  o.detail = std::to_string(graphs) + " graphs, max error " + fmt("%.2e", worst) +
             ", slowest " + fmt("%.2f", slowest) + " s";
  return o;
}

Outcome markov_positivity(const std::vector<Scenario>& all) {
  double min_value = 0.0, max_sum = 0.0;
  long rows = 0;
  for (const auto* g : all_graphs(all)) {
    const LaplacianOperator h(*g);
    for (double s : {0.1, 0.5, 1.0}) {
      for (Index x = 0; x < g->vertex_count(); ++x) {
        const auto row = heat_kernel_row(h, s, x);
        min_value = std::min(min_value, row.min_value());
        max_sum = std::max(max_sum, row.markov_sum(g->mu()));
        ++rows;
      }
    }
  }
  return {min_value >= -1e-12 && max_sum <= 1.0 + 1e-10,
          std::to_string(rows) + " rows, min " + fmt("%.2e", min_value) + ", max row sum 1" +
              fmt("%+.2e", max_sum - 1.0)};
}

Outcome phi_bound_check(const std::vector<Scenario>& all) {
  double worst = -1e300;
  long checked = 0;
  for (const auto* g : all_graphs(all)) {
    const LaplacianOperator h(*g);
    const auto bound = phi_bound(*g);
    for (double s : {0.25, 0.5, 0.75}) {
      const auto values = phi_all(h, s);
      for (std::size_t x = 0; x < values.size(); ++x) {
        worst = std::max(worst, values[x] - bound[x]);
        ++checked;
      }
    }
  }
  return {worst <= 1e-10, std::to_string(checked) + " values, max phi - 1/mu " + fmt("%.3e", worst)};
}

Outcome unitarity(const std::vector<Scenario>& all) {
  const auto& s = find(all, "geometric-decay");
  const auto& pair = s.pair;
  const LaplacianOperator h(pair.g1);
  const IdentificationOperator j(IdentificationOperator::Kind::unitary_J, pair);
  std::mt19937_64 master(kMasterSeed);
  double j_err = 0.0, drift = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(master());
    const auto psi = random_state(pair.g1.vertex_count(), rng);
    const double n1 = norm(psi, pair.g1.mu());
    j_err = std::max(j_err, std::abs(norm(j.apply(psi), pair.g2.mu()) - n1) / n1);
    // Chained steps up to t = 100.
    State cur = psi;
    double t_prev = 0.0;
    for (double t : {1.0, 10.0, 100.0}) {
      cur = evolve(h, t - t_prev, cur);
      t_prev = t;
      drift = std::max(drift, std::abs(norm(cur, pair.g1.mu()) - n1) / n1);
    }
  }
  return {j_err <= 1e-13 && drift <= 1e-9,
          "100 seeds on n=" + std::to_string(pair.g1.vertex_count()) + ", J error " +
              fmt("%.2e", j_err) + ", norm drift " + fmt("%.2e", drift)};
}

Outcome delta_oracle() {
  double worst = 0.0;
  auto err = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const auto id = MetricPairSample::from_pencil(Eigen::MatrixXd::Identity(3, 3));
  err(delta_from_pencil(id), 0.0);
  err(distortion_margin(id).lhs, 0.0);
  const auto spread = distortion_margin(MetricPairSample::from_eigenvalues({4.0, 0.25}));
  err(spread.rhs, 1.5);
  err(spread.lhs, 0.0);
  const auto eq = distortion_margin(MetricPairSample::from_eigenvalues({0.25, 0.25}));
  err(eq.lhs, 1.5);
  err(eq.rhs, 1.5);
  const double e = std::exp(1.0);
  err(delta_from_pencil(MetricPairSample::from_eigenvalues({e, e, e, e})), 2.0 * std::sinh(1.0));

  std::mt19937_64 rng(kMasterSeed);
  auto spd = [&](int m) {
    Eigen::MatrixXd a(m, m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a(r, c) = 2.0 * uniform01(rng) - 1.0;
    }
    return Eigen::MatrixXd(a * a.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m));
  };
  int violations = 0;
  double tightest = 1e300;
  for (int i = 0; i < 10000; ++i) {
    const int m = 2 + i % 3;
    const auto margin = distortion_margin(MetricPairSample::from_metrics(spd(m), spd(m)));
    if (!margin.holds()) ++violations;
    tightest = std::min(tightest, margin.rhs - margin.lhs);
  }
  return {worst <= 1e-12 && violations == 0,
          "hand values within " + fmt("%.1e", worst) + ", " + std::to_string(violations) +
              " violations in 10000 samples (min slack " + fmt("%.2e", tightest) + ")"};
}

EquivalenceReport scatter_first_packet(const Scenario& s, const LaplacianOperator& h1,
                                       const LaplacianOperator& h2) {
  const auto& spec = s.cfg.packets.at(0);
  const auto packet = build_wave_packet(s.pair.g1, spec.k, spec.n0, spec.sigma);
  const auto grid = geometric_grid(0.8 * packet.reflection_time_estimate);
  return run_equivalence(s.pair, h1, h2, packet, grid, s.cfg.criteria.eps_eq,
                         s.cfg.criteria.cauchy_tol);
}

double max_of(const Curve& c) {
  double m = 0.0;
  for (const auto& [t, v] : c) m = std::max(m, v);
  return m;
}

Outcome positive_scenario(const std::vector<Scenario>& all) {
  const auto start = Clock::now();
  const auto& s = find(all, "geometric-decay");
  const auto vs = vertex_sum(s.pair, s.exhaustion);
  const auto e1 = edge_sum(s.pair, 1, s.exhaustion);
  const auto e2 = edge_sum(s.pair, 2, s.exhaustion);
  const LaplacianOperator h1(s.pair.g1), h2(s.pair.g2);
  const auto r = scatter_first_packet(s, h1, h2);
  const double ratio = r.decay_curve.back().second / max_of(r.decay_curve);
  const double elapsed = seconds_since(start);
  const bool criteria_ok = vs.verdict == Verdict::converging &&
                           e1.verdict == Verdict::converging &&
                           e2.verdict == Verdict::converging;
  const bool pass = criteria_ok && r.verdict == Equivalence::equivalent && ratio <= 0.05 &&
                    r.trusted_time < r.reflection_time_estimate && r.final_distance <= 0.1 &&
                    elapsed < 300.0;
  return {pass, "sums " + to_string(vs.verdict) + "/" + to_string(e1.verdict) + "/" +
                    to_string(e2.verdict) + ", D(T)/max D " + fmt("%.2e", ratio) +
                    ", |W_J - W_Jt| " + fmt("%.2e", r.final_distance) + ", " +
                    fmt("%.1f", elapsed) + " s"};
}

Outcome negative_control(const std::vector<Scenario>& all) {
  const auto& s = find(all, "constant-rescale");
  const auto vs = vertex_sum(s.pair, s.exhaustion);
  const LaplacianOperator h1(s.pair.g1), h2(s.pair.g2);
  nlohmann::json summary = {{"verdicts", nlohmann::json::object()}, {"asp", nlohmann::json::array()}};
  summary["verdicts"]["vertex_sum"] = to_string(vs.verdict);
  summary["verdicts"]["edge_sum_j1"] = to_string(edge_sum(s.pair, 1, s.exhaustion).verdict);
  summary["verdicts"]["edge_sum_j2"] = to_string(edge_sum(s.pair, 2, s.exhaustion).verdict);
  summary["verdicts"]["quasi_equiv"] =
      to_string(quasi_equivalence_check(s.pair, s.cfg.criteria.quasi_threshold).verdict);
  for (double sv : s.cfg.criteria.s_values) {
    const auto asp = asp_partial_sum(s.pair, phi_all(h1, sv), s.exhaustion, sv, PhiMode::exact);
    summary["asp"].push_back({{"s", sv}, {"verdict", to_string(asp.verdict)}});
  }
  const auto predicted = lab::criteria_prediction(summary);
  const auto r = scatter_first_packet(s, h1, h2);
  double flat = 0.0;
  for (const auto& [t, d] : r.decay_curve) flat = std::max(flat, std::abs(d - 1.0));
  const bool agree = lab::verdicts_agree(predicted, r.verdict);
  const bool pass = vs.verdict == Verdict::diverging && flat <= 0.01 &&
                    r.verdict == Equivalence::not_equivalent && agree;
  return {pass, "vertex_sum " + to_string(vs.verdict) + ", max |D - 1| " + fmt("%.2e", flat) +
                    ", simulation " + to_string(r.verdict) + ", prediction " +
                    to_string(predicted) + (agree ? ", agree" : ", DISAGREE")};
}

Outcome rage(const std::vector<Scenario>& all) {
  const auto& s = find(all, "identity");
  const auto& g = s.pair.g1;
  const LaplacianOperator h(g);
  const auto& spec = s.cfg.packets.at(0);
  const auto packet = build_wave_packet(g, spec.k, spec.n0, spec.sigma);
  const double t_end = 0.8 * packet.reflection_time_estimate;
  const auto window = label_window(g, packet.center, 5.0 * packet.width);
  const auto curve = rage_decay(h, packet, window, geometric_grid(t_end));
  const double ratio = curve.back().second / curve.front().second;
  return {ratio <= 0.05, "window " + std::to_string(window.size()) + " sites, mass(T)/mass(0) " +
                             fmt("%.2e", ratio) + " at T=" + fmt("%g", t_end)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / "scatterlab_acceptance";
  fs::remove_all(base);
  const auto a = base / "a", b = base / "b";
  for (const auto& dir : {a, b}) {
    lab::CommandOptions opts;
    opts.config = kBundled;
    opts.out = dir;
    opts.seed = kMasterSeed;
    std::ostringstream sink;
    const int c1 = lab::cmd_criteria(opts, sink, sink);
    const int c2 = lab::cmd_scatter(opts, sink, sink);
    if (c1 != lab::kExitOk || c2 != lab::kExitOk) {
      return {false, "run exited with " + std::to_string(c1) + "/" + std::to_string(c2)};
    }
  }
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto other = b / fs::relative(entry.path(), a);
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  fs::remove_all(base);
  return {files > 0 && differing == 0,
          std::to_string(files) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  unsetenv("SCATTERLAB_OUT");
  const auto suite = load_bundled();
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"operator correctness (Chebyshev vs dense)", [&] { return operator_correctness(suite); }},
      {"heat kernel positivity and Markov bound", [&] { return markov_positivity(suite); }},
      {"phi bounded by 1/mu", [&] { return phi_bound_check(suite); }},
      {"unitarity of J and of the propagator", [&] { return unitarity(suite); }},
      {"delta formula and distortion inequality", [] { return delta_oracle(); }},
      {"positive scenario: geometric density perturbation", [&] { return positive_scenario(suite); }},
      {"negative control: constant rescale", [&] { return negative_control(suite); }},
      {"local mass decay on the free line", [&] { return rage(suite); }},
      {"bit-identical CSVs across runs", [] { return determinism(); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu acceptance criteria passed\n",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
