#include "scatterlab/lab/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "scatterlab/criteria.hpp"
#include "scatterlab/format.hpp"
#include "scatterlab/lab/manifest.hpp"
#include "scatterlab/propagation.hpp"
#include "scatterlab/random.hpp"

namespace scatterlab::lab {

namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs fn(0..count-1) on at most `jobs` threads.
void run_pool(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)),
                                                      1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

struct Outcome {
  int code = kExitOk;
  std::string message;
};

int worst(const std::vector<Outcome>& outcomes) {
  int code = kExitOk;
  for (const auto& o : outcomes) {
    if (o.code == kExitRuntime) return kExitRuntime;
    if (o.code == kExitValidation) code = kExitValidation;
    if (o.code == kExitInconsistent && code == kExitOk) code = kExitInconsistent;
  }
  return code;
}

struct LoadedRun {
  RunConfig cfg;
  std::string hash;
  std::filesystem::path out_dir;
};

std::optional<LoadedRun> load_run(const CommandOptions& opts, std::ostream& err) {
  try {
    LoadedRun run;
    run.cfg = load_config(opts.config);
    run.hash = sha256_hex(read_text(opts.config));
    run.out_dir = resolve_output_dir(opts, run.cfg);
    return run;
  } catch (const ConfigError& e) {
    err << "config error at " << e.where() << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
  }
  return std::nullopt;
}

struct ScenarioGraphs {
  std::vector<WeightedGraph> levels1;
  GraphPair pair;
  Exhaustion exhaustion;
};

ScenarioGraphs build_scenario(const ScenarioConfig& s, std::size_t index) {
  ScenarioGraphs out;
  std::vector<WeightedGraph> levels2;
  for (int level : s.levels) {
    out.levels1.push_back(build_level(s, 1, level, index));
    levels2.push_back(build_level(s, 2, level, index));
    if (out.levels1.back().labels() != levels2.back().labels()) {
      throw ConfigError("scenarios[" + std::to_string(index) + "]",
                        "g1 and g2 have different vertex sets at level " +
                            std::to_string(level));
    }
  }
  out.pair = pair_graphs(out.levels1.back(), levels2.back());
  out.exhaustion = make_exhaustion(out.pair, out.levels1);
  return out;
}

std::string s_tag(double s) { return format_double(s); }

TimeGrid grid_for(const TimeGridSpec& spec, const WavePacket& packet) {
  if (spec.kind == TimeGridSpec::Kind::list) return spec.times;
  const double t_max =
      spec.t_max ? *spec.t_max : spec.fraction_of_reflection * packet.reflection_time_estimate;
  return geometric_grid(t_max);
}

std::optional<json> read_json_if_listed(const std::filesystem::path& run_dir,
                                        const std::string& relative) {
  const auto path = run_dir / relative;
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    std::ifstream in(path);
    json j;
    in >> j;
    return j;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::filesystem::path resolve_output_dir(const CommandOptions& opts, const RunConfig& cfg) {
  if (const char* env = std::getenv("SCATTERLAB_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  if (opts.out) return *opts.out;
  if (cfg.output_dir) return *cfg.output_dir;
  return "scatterlab-out";
}

json OperatorChecks::to_json() const {
  return {{"self_adjoint_rel_error", self_adjoint_rel_error},
          {"min_form_ratio", min_form_ratio},
          {"form_identity_rel_error", form_identity_rel_error},
          {"j_unitarity_rel_error", j_unitarity_rel_error}};
}

OperatorChecks operator_checks(const GraphPair& pair, const LaplacianOperator& h1,
                               std::uint64_t seed, int samples) {
  std::mt19937_64 rng(seed);
  const auto& g = h1.graph();
  const auto& mu1 = g.mu();
  const auto& mu2 = pair.g2.mu();
  const IdentificationOperator j(IdentificationOperator::Kind::unitary_J, pair);
  OperatorChecks c;
  c.min_form_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const State a = random_state(mu1.size(), rng);
    const State b = random_state(mu1.size(), rng);
    const State ha = h1.apply(a);
    const State hb = h1.apply(b);
    const Complex lhs = inner_product(ha, b, mu1);
    const Complex rhs = inner_product(a, hb, mu1);
    const double scale = norm(ha, mu1) * norm(b, mu1) + norm(a, mu1) * norm(hb, mu1);
    c.self_adjoint_rel_error =
        std::max(c.self_adjoint_rel_error, std::abs(lhs - rhs) / std::max(scale, 1e-300));

    const double form = inner_product(ha, a, mu1).real();
    const double nrm2 = std::pow(norm(a, mu1), 2);
    c.min_form_ratio = std::min(c.min_form_ratio, form / nrm2);
    double energy = 0.0;
    for (Index x = 0; x < g.vertex_count(); ++x) {
      auto nb = g.neighbors(x);
      auto w = g.weights(x);
      for (std::size_t k = 0; k < nb.size(); ++k) energy += 0.5 * w[k] * std::norm(a[x] - a[nb[k]]);
    }
    c.form_identity_rel_error = std::max(
        c.form_identity_rel_error, std::abs(form - energy) / std::max(std::abs(energy), 1e-300));
    const double n1 = norm(a, mu1);
    const double n2 = norm(j.apply(a), mu2);
    c.j_unitarity_rel_error = std::max(c.j_unitarity_rel_error, std::abs(n2 - n1) / n1);
  }
  return c;
}

Equivalence criteria_prediction(const json& summary) {
  const auto& v = summary.at("verdicts");
  auto is = [&](const char* key, const char* verdict) {
    return v.contains(key) && v[key].get<std::string>() == verdict;
  };
  const bool sums_converge = is("vertex_sum", "converging") &&
                             is("edge_sum_j1", "converging") &&
                             is("edge_sum_j2", "converging") &&
                             is("quasi_equiv", "converging");
  const auto& asp = summary.at("asp");
  bool asp_all_converge = !asp.empty();
  bool asp_all_diverge = !asp.empty();
  for (const auto& entry : asp) {
    const auto verdict = entry.at("verdict").get<std::string>();
    asp_all_converge = asp_all_converge && verdict == "converging";
    asp_all_diverge = asp_all_diverge && verdict == "diverging";
  }
  if (sums_converge || asp_all_converge) return Equivalence::equivalent;
  if (asp_all_diverge && is("vertex_sum", "diverging")) return Equivalence::not_equivalent;
  return Equivalence::inconclusive;
}

Equivalence aggregate_simulation(const std::vector<Equivalence>& verdicts) {
  if (verdicts.empty()) return Equivalence::inconclusive;
  const auto first = verdicts.front();
  for (auto v : verdicts) {
    if (v != first) return Equivalence::inconclusive;
  }
  return first;
}

bool verdicts_agree(Equivalence predicted, Equivalence simulated) {
  using E = Equivalence;
  return !((predicted == E::equivalent && simulated == E::not_equivalent) ||
           (predicted == E::not_equivalent && simulated == E::equivalent));
}

// --- validate ---------------------------------------------------------------

int cmd_validate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  auto run = load_run(opts, err);
  if (!run) return kExitValidation;
  int code = kExitOk;
  for (std::size_t i = 0; i < run->cfg.scenarios.size(); ++i) {
    const auto& s = run->cfg.scenarios[i];
    try {
      const int level = s.levels.front();
      const auto g1 = build_level(s, 1, level, i);
      const auto g2 = build_level(s, 2, level, i);
      bool clean = true;
      for (int which : {1, 2}) {
        const auto report = validate(which == 1 ? g1 : g2);
        for (const auto& v : report.violations) {
          err << "scenarios[" << i << "].g" << which << ": " << v.message << '\n';
          clean = false;
        }
      }
      if (g1.labels() != g2.labels()) {
        err << "scenarios[" << i << "]: g1 and g2 have different vertex sets\n";
        clean = false;
      }
      out << s.id << ": " << (clean ? "ok" : "invalid") << " (level " << level << ", "
          << g1.vertex_count() << " vertices)\n";
      if (!clean) code = kExitValidation;
    } catch (const ConfigError& e) {
      err << "config error at " << e.where() << ": " << e.what() << '\n';
      code = kExitValidation;
    }
  }
  return code;
}

// --- criteria ---------------------------------------------------------------

int cmd_criteria(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  auto run = load_run(opts, err);
  if (!run) return kExitValidation;
  ManifestWriter writer(run->out_dir, run->hash, opts.seed);
  std::mutex log_mutex;
  std::vector<Outcome> outcomes(run->cfg.scenarios.size());

  run_pool(run->cfg.scenarios.size(), opts.jobs, [&](std::size_t i) {
    const auto& s = run->cfg.scenarios[i];
    const std::string dir = s.id + "/criteria/";
    try {
      const auto sg = build_scenario(s, i);
      const LaplacianOperator h1(sg.pair.g1);
      const auto s_values = opts.s_values ? *opts.s_values : s.criteria.s_values;

      std::vector<CriterionReport> reports;
      json asp = json::array();
      const auto bound = phi_bound(sg.pair.g1);
      for (double sv : s_values) {
        auto report = s.criteria.phi_mode == PhiMode::exact
                          ? asp_partial_sum(sg.pair, phi_all(h1, sv), sg.exhaustion, sv,
                                            PhiMode::exact)
                          : asp_partial_sum(sg.pair, bound, sg.exhaustion, sv, PhiMode::bound);
        asp.push_back({{"s", sv}, {"verdict", to_string(report.verdict)}});
        const std::string stem =
            dir + "asp_" + to_string(s.criteria.phi_mode) + "_s" + s_tag(sv);
        writer.write(stem + ".json", report.to_json().dump(2) + "\n");
        writer.write(stem + ".csv", report.to_csv());
      }
      if (s.criteria.phi_mode == PhiMode::exact) {
        // Bound-mode companion; it dominates every exact-mode sum.
        auto report = asp_partial_sum(sg.pair, bound, sg.exhaustion, 0.0, PhiMode::bound);
        report.parameters.erase("s");
        writer.write(dir + "asp_bound.json", report.to_json().dump(2) + "\n");
        writer.write(dir + "asp_bound.csv", report.to_csv());
      }
      reports.push_back(vertex_sum(sg.pair, sg.exhaustion));
      reports.push_back(edge_sum(sg.pair, 1, sg.exhaustion));
      reports.push_back(edge_sum(sg.pair, 2, sg.exhaustion));
      auto quasi = quasi_equivalence_check(sg.pair, s.criteria.quasi_threshold);
      quasi.partial_sums.emplace_back(sg.exhaustion.levels.back(),
                                      std::max(sg.pair.a_mu, sg.pair.a_b));
      reports.push_back(std::move(quasi));

      json verdicts = json::object();
      for (const auto& r : reports) {
        const auto name = to_string(r.id);
        verdicts[name] = to_string(r.verdict);
        writer.write(dir + name + ".json", r.to_json().dump(2) + "\n");
        writer.write(dir + name + ".csv", r.to_csv());
      }
      json summary = {{"scenario", s.id},
                      {"verdicts", verdicts},
                      {"asp", asp},
                      {"a_mu", sg.pair.a_mu},
                      {"a_b", std::isfinite(sg.pair.a_b) ? json(sg.pair.a_b) : json("inf")},
                      {"levels", sg.exhaustion.levels},
                      {"level_sizes", sg.exhaustion.sizes},
                      {"seed", opts.seed},
                      {"operator_checks", operator_checks(sg.pair, h1, opts.seed, 8).to_json()}};
      summary["prediction"] = to_string(criteria_prediction(summary));
      writer.write(dir + "summary.json", summary.dump(2) + "\n");
      writer.set_status(s.id, "criteria", "ok");
      std::lock_guard lock(log_mutex);
      out << s.id << ": prediction " << summary["prediction"].get<std::string>() << '\n';
    } catch (const ConfigError& e) {
      outcomes[i] = {kExitValidation, e.what()};
      writer.set_status(s.id, "criteria", std::string("invalid: ") + e.what());
    } catch (const std::exception& e) {
      outcomes[i] = {kExitRuntime, e.what()};
      writer.set_status(s.id, "criteria", std::string("failed: ") + e.what());
    }
  });
  writer.commit();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].code != kExitOk) {
      err << run->cfg.scenarios[i].id << ": " << outcomes[i].message << '\n';
    }
  }
  return worst(outcomes);
}

// --- scatter ----------------------------------------------------------------

int cmd_scatter(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  auto run = load_run(opts, err);
  if (!run) return kExitValidation;
  ManifestWriter writer(run->out_dir, run->hash, opts.seed);
  std::mutex log_mutex;
  std::vector<Outcome> outcomes(run->cfg.scenarios.size());

  run_pool(run->cfg.scenarios.size(), opts.jobs, [&](std::size_t i) {
    const auto& s = run->cfg.scenarios[i];
    const std::string dir = s.id + "/scatter/";
    try {
      const auto sg = build_scenario(s, i);
      const LaplacianOperator h1(sg.pair.g1);
      const LaplacianOperator h2(sg.pair.g2);
      std::vector<double> multiplier(sg.pair.rho.size());
      for (std::size_t x = 0; x < multiplier.size(); ++x) {
        multiplier[x] = 1.0 - 1.0 / std::sqrt(sg.pair.rho[x]);
      }

      json packets = json::array();
      std::vector<Equivalence> verdicts;
      bool window_errors = false;
      for (std::size_t p = 0; p < s.packets.size(); ++p) {
        const auto& spec = s.packets[p];
        const auto forward = build_wave_packet(sg.pair.g1, spec.k, spec.n0, spec.sigma);
        std::vector<WavePacket> runs{forward};
        if (opts.both_signs) runs.push_back(time_reversed(forward));
        for (const auto& packet : runs) {
          const std::string tag = "packet" + std::to_string(p) +
                                  (packet.time_reversed ? "_minus" : "");
          const std::string pdir = dir + tag + "/";
          try {
            const auto grid = grid_for(s.time_grid, packet);
            const auto report = run_equivalence(sg.pair, h1, h2, packet, grid,
                                                s.criteria.eps_eq, s.criteria.cauchy_tol);
            const auto rage = rage_decay(h1, packet,
                                         label_window(sg.pair.g1, packet.center,
                                                      5.0 * packet.width),
                                         grid);
            const double l = s.criteria.filter_fraction * h1.spectral_upper_bound();
            const auto filter = compactness_filter_decay(h1, multiplier, packet, l, grid);
            json report_json = report.to_json();
            report_json["direction"] = packet.time_reversed ? "minus" : "plus";
            report_json["rage"] = {{"window_radius", 5.0 * packet.width},
                                   {"final_over_initial",
                                    rage.back().second / rage.front().second}};
            report_json["filter"] = {{"l", l},
                                     {"backend", filter.backend},
                                     {"edge_width", filter.edge_width},
                                     {"chebyshev_order", filter.chebyshev_order}};
            writer.write(pdir + "equivalence.json", report_json.dump(2) + "\n");
            writer.write(pdir + "decay.csv", curve_to_csv(report.decay_curve));
            writer.write(pdir + "cauchy_J.csv", curve_to_csv(report.cauchy_j));
            writer.write(pdir + "cauchy_Jtilde.csv", curve_to_csv(report.cauchy_jtilde));
            writer.write(pdir + "rage.csv", curve_to_csv(rage));
            writer.write(pdir + "filter.csv", curve_to_csv(filter.norms));
            verdicts.push_back(report.verdict);
            packets.push_back({{"packet", tag},
                               {"verdict", to_string(report.verdict)},
                               {"final_distance", report.final_distance}});
          } catch (const TrustedWindowError& e) {
            window_errors = true;
            packets.push_back({{"packet", tag}, {"error", e.what()}});
          }
        }
      }
      const auto simulated = aggregate_simulation(verdicts);
      json summary = {{"scenario", s.id},
                      {"packets", packets},
                      {"simulation", to_string(simulated)}};
      int code = window_errors ? kExitRuntime : kExitOk;
      if (auto crit = read_json_if_listed(run->out_dir, s.id + "/criteria/summary.json")) {
        const auto predicted = equivalence_from_string(crit->at("prediction").get<std::string>());
        const bool agree = verdicts_agree(predicted, simulated);
        summary["prediction"] = to_string(predicted);
        summary["agreement"] = agree;
        if (!agree && code == kExitOk) code = kExitInconsistent;
      }
      writer.write(dir + "summary.json", summary.dump(2) + "\n");
      writer.set_status(s.id, "scatter", window_errors ? "trusted-window violation" : "ok");
      outcomes[i] = {code, window_errors ? "trusted-window violation" : "verdicts disagree"};
      std::lock_guard lock(log_mutex);
      out << s.id << ": simulation " << to_string(simulated) << '\n';
    } catch (const ConfigError& e) {
      outcomes[i] = {kExitValidation, e.what()};
      writer.set_status(s.id, "scatter", std::string("invalid: ") + e.what());
    } catch (const std::exception& e) {
      outcomes[i] = {kExitRuntime, e.what()};
      writer.set_status(s.id, "scatter", std::string("failed: ") + e.what());
    }
  });
  writer.commit();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].code != kExitOk) {
      err << run->cfg.scenarios[i].id << ": " << outcomes[i].message << '\n';
    }
  }
  return worst(outcomes);
}

// --- report -----------------------------------------------------------------

int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err) {
  json manifest;
  try {
    manifest = load_verified_manifest(run_dir);
  } catch (const ManifestError& e) {
    err << "report: " << e.what() << '\n';
    return kExitRuntime;
  }
  std::ostringstream csv, md;
  csv << "scenario,criteria_prediction,simulation_verdict,agreement\n";
  md << "| scenario | criteria prediction | simulation verdict | agreement |\n"
     << "|---|---|---|---|\n";
  bool all_agree = true;
  const auto& files = manifest["files"];
  for (const auto& [id, status] : manifest["scenarios"].items()) {
    std::string predicted = "missing", simulated = "missing";
    const auto crit_path = id + "/criteria/summary.json";
    const auto scat_path = id + "/scatter/summary.json";
    if (files.contains(crit_path)) {
      if (auto j = read_json_if_listed(run_dir, crit_path)) {
        predicted = j->at("prediction").get<std::string>();
      }
    }
    if (files.contains(scat_path)) {
      if (auto j = read_json_if_listed(run_dir, scat_path)) {
        simulated = j->at("simulation").get<std::string>();
      }
    }
    bool agree = true;
    if (predicted != "missing" && simulated != "missing") {
      agree = verdicts_agree(equivalence_from_string(predicted),
                             equivalence_from_string(simulated));
    }
    all_agree = all_agree && agree;
    csv << id << ',' << predicted << ',' << simulated << ',' << (agree ? "true" : "false")
        << '\n';
    md << "| " << id << " | " << predicted << " | " << simulated << " | "
       << (agree ? "true" : "false") << " |\n";
  }
  try {
    ManifestWriter writer(run_dir, manifest.value("config_hash", ""),
                          manifest.value("seed", std::uint64_t{0}));
    writer.write("summary.csv", csv.str());
    writer.write("summary.md", md.str());
    writer.commit();
  } catch (const std::exception& e) {
    err << "report: " << e.what() << '\n';
    return kExitRuntime;
  }
  out << md.str();
  return all_agree ? kExitOk : kExitInconsistent;
}

}  // namespace scatterlab::lab
