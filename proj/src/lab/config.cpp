#include "scatterlab/lab/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace scatterlab::lab {

namespace {

using nlohmann::json;

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, path + "." + key);
}

Label integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<Label>();
}

Profile parse_profile(const json& j, const std::string& path, bool positive) {
  Profile p;
  if (j.is_number()) {
    p = Profile::constant(j.get<double>());
  } else {
    const auto type = field(j, path, "type");
    if (!type.is_string()) throw ConfigError(path + ".type", "expected a string");
    const auto t = type.get<std::string>();
    if (t == "constant") {
      p = Profile::constant(number(field(j, path, "value"), path + ".value"));
    } else if (t == "geometric") {
      p = Profile::geometric(number_or(j, path, "base", 1.0),
                             number(field(j, path, "amplitude"), path + ".amplitude"),
                             number_or(j, path, "ratio", 0.5));
    } else if (t == "algebraic") {
      p = Profile::algebraic(number_or(j, path, "base", 1.0),
                             number(field(j, path, "amplitude"), path + ".amplitude"),
                             number_or(j, path, "power", 1.0));
    } else if (t == "linear") {
      p = Profile::linear(number_or(j, path, "base", 0.0),
                          number(field(j, path, "slope"), path + ".slope"));
    } else if (t == "finite") {
      std::map<Label, double> sites;
      const auto& list = field(j, path, "sites");
      if (!list.is_array()) throw ConfigError(path + ".sites", "expected [[label, value], ...]");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string p_i = path + ".sites[" + std::to_string(i) + "]";
        if (!list[i].is_array() || list[i].size() != 2) {
          throw ConfigError(p_i, "expected [label, value]");
        }
        sites[integer(list[i][0], p_i + "[0]")] = number(list[i][1], p_i + "[1]");
      }
      p = Profile::finite(number_or(j, path, "base", 1.0), std::move(sites));
    } else {
      throw ConfigError(path + ".type", "unknown profile type '" + t + "'");
    }
  }
  if (positive && p.kind == Profile::Kind::constant && !(p.base > 0.0)) {
    throw ConfigError(j.is_number() ? path : path + ".value", "measure must be positive");
  }
  if (positive && p.kind == Profile::Kind::finite) {
    for (const auto& [site, v] : p.overrides) {
      if (!(v > 0.0)) throw ConfigError(path + ".sites", "measure must be positive");
    }
  }
  return p;
}

GraphFamilySpec parse_family(const json& j, const std::string& path,
                             const std::filesystem::path& base) {
  GraphFamilySpec f;
  const auto& name = field(j, path, "family");
  if (!name.is_string()) throw ConfigError(path + ".family", "expected a string");
  const auto n = name.get<std::string>();
  if (n == "line") {
    f.kind = GraphFamilySpec::Kind::line;
  } else if (n == "half_line") {
    f.kind = GraphFamilySpec::Kind::half_line;
  } else if (n == "single_vertex") {
    f.kind = GraphFamilySpec::Kind::single_vertex;
  } else if (n == "edge_list") {
    f.kind = GraphFamilySpec::Kind::edge_list;
  } else {
    throw ConfigError(path + ".family", "unknown graph family '" + n + "'");
  }
  if (auto it = j.find("radii"); it != j.end()) {
    if (!it->is_array()) throw ConfigError(path + ".radii", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto r = integer((*it)[i], path + ".radii[" + std::to_string(i) + "]");
      if (r < 0 || (!f.radii.empty() && r <= f.radii.back())) {
        throw ConfigError(path + ".radii", "radii must be nonnegative and strictly increasing");
      }
      f.radii.push_back(r);
    }
  } else if (f.kind == GraphFamilySpec::Kind::line ||
             f.kind == GraphFamilySpec::Kind::half_line) {
    throw ConfigError(path + ".radii", "missing required field");
  }
  if (auto it = j.find("b"); it != j.end()) f.b = parse_profile(*it, path + ".b", false);
  if (auto it = j.find("mu"); it != j.end()) f.mu = parse_profile(*it, path + ".mu", true);

  if (f.kind == GraphFamilySpec::Kind::edge_list) {
    WeightedGraph g;
    try {
      if (auto it = j.find("graph_file"); it != j.end()) {
        g = read_graph_file(base / it->get<std::string>());
      } else {
        g = graph_from_json(field(j, path, "graph"));
      }
    } catch (const GraphError& e) {
      throw ConfigError(path + ".graph", e.what());
    }
    f.labels = g.labels();
    f.measure = g.mu();
    for (Index x = 0; x < g.vertex_count(); ++x) {
      auto nb = g.neighbors(x);
      auto w = g.weights(x);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (nb[k] > x) f.edges.push_back({g.labels()[x], g.labels()[nb[k]], w[k]});
      }
    }
    f.root = j.contains("root") ? integer(j["root"], path + ".root") : f.labels.front();
  }
  return f;
}

TimeGridSpec parse_grid(const json& j, const std::string& path) {
  TimeGridSpec g;
  const auto type = j.value("type", std::string("geometric"));
  if (type == "geometric") {
    g.kind = TimeGridSpec::Kind::geometric;
    if (j.contains("t_max")) g.t_max = number(j["t_max"], path + ".t_max");
    g.fraction_of_reflection =
        number_or(j, path, "fraction_of_reflection", g.fraction_of_reflection);
    if (!(g.fraction_of_reflection > 0.0 && g.fraction_of_reflection < 1.0)) {
      throw ConfigError(path + ".fraction_of_reflection", "must lie in (0, 1)");
    }
  } else if (type == "list") {
    g.kind = TimeGridSpec::Kind::list;
    const auto& times = field(j, path, "times");
    if (!times.is_array()) throw ConfigError(path + ".times", "expected an array");
    for (std::size_t i = 0; i < times.size(); ++i) {
      g.times.push_back(number(times[i], path + ".times[" + std::to_string(i) + "]"));
    }
  } else {
    throw ConfigError(path + ".type", "unknown time grid type '" + type + "'");
  }
  return g;
}

CriteriaSpec parse_criteria(const json& j, const std::string& path) {
  CriteriaSpec c;
  if (auto it = j.find("s_values"); it != j.end()) {
    c.s_values.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const double s = number((*it)[i], path + ".s_values[" + std::to_string(i) + "]");
      if (!(s > 0.0 && s < 1.0)) {
        throw ConfigError(path + ".s_values[" + std::to_string(i) + "]",
                          "s must lie in (0, 1)");
      }
      c.s_values.push_back(s);
    }
  }
  if (auto it = j.find("phi_mode"); it != j.end()) {
    const auto m = it->get<std::string>();
    if (m == "exact") {
      c.phi_mode = PhiMode::exact;
    } else if (m == "bound") {
      c.phi_mode = PhiMode::bound;
    } else {
      throw ConfigError(path + ".phi_mode", "expected 'exact' or 'bound'");
    }
  }
  c.quasi_threshold = number_or(j, path, "quasi_threshold", c.quasi_threshold);
  if (!(c.quasi_threshold >= 1.0)) {
    throw ConfigError(path + ".quasi_threshold", "must be >= 1");
  }
  c.eps_eq = number_or(j, path, "eps_eq", c.eps_eq);
  c.cauchy_tol = number_or(j, path, "cauchy_tol", c.cauchy_tol);
  c.filter_fraction = number_or(j, path, "filter_fraction", c.filter_fraction);
  return c;
}

ScenarioConfig parse_scenario(const json& j, const std::string& path,
                              const std::filesystem::path& base) {
  ScenarioConfig s;
  const auto& id = field(j, path, "id");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw ConfigError(path + ".id", "expected a nonempty string");
  }
  s.id = id.get<std::string>();
  s.g1 = parse_family(field(j, path, "g1"), path + ".g1", base);
  s.g2 = parse_family(field(j, path, "g2"), path + ".g2", base);
  if (auto it = j.find("levels"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      s.levels.push_back(static_cast<int>(
          integer((*it)[i], path + ".levels[" + std::to_string(i) + "]")));
    }
  } else {
    for (int k = 0; k < s.g1.level_count(); ++k) s.levels.push_back(k);
  }
  for (std::size_t i = 0; i < s.levels.size(); ++i) {
    if (i > 0 && s.levels[i] <= s.levels[i - 1]) {
      throw ConfigError(path + ".levels", "levels must be strictly increasing");
    }
    if (s.levels[i] < 0 || s.levels[i] >= s.g1.level_count() ||
        s.levels[i] >= s.g2.level_count()) {
      throw ConfigError(path + ".levels[" + std::to_string(i) + "]",
                        "level outside the family schedule");
    }
  }
  if (s.levels.empty()) throw ConfigError(path + ".levels", "no truncation levels");
  if (auto it = j.find("packets"); it != j.end()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = path + ".packets[" + std::to_string(i) + "]";
      const auto& pj = (*it)[i];
      PacketSpec ps;
      if (pj.contains("k_over_pi")) {
        ps.k = std::numbers::pi * number(pj["k_over_pi"], p + ".k_over_pi");
      } else {
        ps.k = number(field(pj, p, "k"), p + ".k");
      }
      if (!(ps.k > 0.0 && ps.k < std::numbers::pi)) {
        throw ConfigError(p + ".k", "carrier momentum must lie in (0, pi)");
      }
      ps.n0 = pj.contains("n0") ? integer(pj["n0"], p + ".n0") : 0;
      ps.sigma = number(field(pj, p, "sigma"), p + ".sigma");
      if (!(ps.sigma > 0.0)) throw ConfigError(p + ".sigma", "must be positive");
      s.packets.push_back(ps);
    }
  }
  if (auto it = j.find("time_grid"); it != j.end()) {
    s.time_grid = parse_grid(*it, path + ".time_grid");
  }
  if (auto it = j.find("criteria"); it != j.end()) {
    s.criteria = parse_criteria(*it, path + ".criteria");
  }
  return s;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base) {
  RunConfig cfg;
  const auto& list = field(j, "$", "scenarios");
  if (!list.is_array()) throw ConfigError("$.scenarios", "expected an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "scenarios[" + std::to_string(i) + "]";
    auto s = parse_scenario(list[i], path, base);
    if (!ids.insert(s.id).second) {
      throw ConfigError(path + ".id", "duplicate scenario_id '" + s.id + "'");
    }
    cfg.scenarios.push_back(std::move(s));
  }
  if (j.contains("output")) cfg.output_dir = j["output"].get<std::string>();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col),
                      "JSON syntax error");
  }
  try {
    return parse_config(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string(), e.what());
  }
}

WeightedGraph build_level(const ScenarioConfig& scenario, int which, int level,
                          std::size_t scenario_index) {
  const auto& family = which == 1 ? scenario.g1 : scenario.g2;
  try {
    return build_truncation(family, level);
  } catch (const GraphError& e) {
    throw ConfigError("scenarios[" + std::to_string(scenario_index) + "].g" +
                          std::to_string(which),
                      e.what());
  }
}

}  // namespace scatterlab::lab
