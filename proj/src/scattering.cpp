#include "scatterlab/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "scatterlab/format.hpp"

namespace scatterlab {

double WavePacket::group_speed() const { return 2.0 * std::sin(std::abs(momentum)); }

nlohmann::json WavePacket::provenance() const {
  return {{"k", momentum},
          {"n0", center},
          {"sigma", width},
          {"time_reversed", time_reversed},
          {"reflection_time_estimate", reflection_time_estimate}};
}

double window_mass(const WeightedGraph& g, std::span<const Complex> psi, Label center,
                   double radius) {
  double acc = 0.0;
  for (Index x = 0; x < g.vertex_count(); ++x) {
    const double d = std::abs(static_cast<double>(g.labels()[x] - center));
    if (d <= radius) acc += std::norm(psi[x]) * g.mu()[x];
  }
  return acc;
}

WavePacket build_wave_packet(const WeightedGraph& g, double k, Label center, double sigma) {
  if (!(k > 0.0 && k < std::numbers::pi)) {
    throw ScatteringError("carrier momentum must lie in (0, pi)");
  }
  if (!(sigma > 0.0)) throw ScatteringError("packet width must be positive");
  const Label reach = static_cast<Label>(std::ceil(kPacketWindowWidths * sigma));
  for (Label n = center - reach; n <= center + reach; ++n) {
    if (!g.index_of(n)) {
      throw ScatteringError("packet does not fit: vertex " + std::to_string(n) +
                            " of the 6-sigma window is missing");
    }
  }
  WavePacket p;
  p.momentum = k;
  p.center = center;
  p.width = sigma;
  p.state.resize(static_cast<std::size_t>(g.vertex_count()));
  for (Index x = 0; x < g.vertex_count(); ++x) {
    const double n = static_cast<double>(g.labels()[x]);
    const double d = n - static_cast<double>(center);
    p.state[x] = std::polar(std::exp(-d * d / (4.0 * sigma * sigma)), k * n);
  }
  const double nrm = norm(p.state, g.mu());
  for (auto& v : p.state) v /= nrm;
  if (window_mass(g, p.state, center, kPacketWindowWidths * sigma) < kPacketMassFraction) {
    throw ScatteringError("packet does not fit: less than 99.9% of the mass lies in the "
                          "6-sigma window");
  }
  const auto [lo, hi] = std::minmax_element(g.labels().begin(), g.labels().end());
  const double distance = static_cast<double>(std::min(center - *lo, *hi - center));
  p.reflection_time_estimate = distance / p.group_speed();
  return p;
}

WavePacket time_reversed(const WavePacket& packet) {
  WavePacket out = packet;
  out.momentum = -packet.momentum;
  out.time_reversed = !packet.time_reversed;
  for (auto& v : out.state) v = std::conj(v);
  return out;
}

TimeGrid geometric_grid(double t_max) {
  if (!(t_max > 0.0)) throw std::invalid_argument("time grid needs t_max > 0");
  TimeGrid grid{0.0};
  for (double t = 1.0; t <= t_max; t *= 2.0) grid.push_back(t);
  if (grid.back() < t_max) grid.push_back(t_max);
  return grid;
}

void check_trusted(const TimeGrid& grid, const WavePacket& packet) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) throw TrustedWindowError("negative time in grid");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw TrustedWindowError("time grid must be strictly increasing");
    }
    if (grid[i] >= packet.reflection_time_estimate) {
      throw TrustedWindowError("time " + format_double(grid[i]) +
                               " is outside the trusted window (reflection at " +
                               format_double(packet.reflection_time_estimate) + ")");
    }
  }
}

std::string curve_to_csv(const Curve& curve) {
  std::ostringstream out;
  out << "t,value\n";
  for (const auto& [t, v] : curve) out << format_double(t) << ',' << format_double(v) << '\n';
  return out.str();
}

std::vector<State> trajectory(const LaplacianOperator& h, std::span<const Complex> psi,
                              const TimeGrid& grid) {
  std::vector<State> out;
  out.reserve(grid.size());
  State cur(psi.begin(), psi.end());
  double t = 0.0;
  for (double next : grid) {
    if (next != t) cur = evolve(h, next - t, cur);
    t = next;
    out.push_back(cur);
  }
  return out;
}

std::vector<Index> label_window(const WeightedGraph& g, Label center, double radius) {
  std::vector<Index> out;
  for (Index x = 0; x < g.vertex_count(); ++x) {
    if (std::abs(static_cast<double>(g.labels()[x] - center)) <= radius) out.push_back(x);
  }
  return out;
}

Curve rage_decay(const LaplacianOperator& h, const WavePacket& packet,
                 const std::vector<Index>& window, const TimeGrid& grid) {
  check_trusted(grid, packet);
  const auto& mu = h.graph().mu();
  for (Index x : window) {
    if (x < 0 || x >= h.dimension()) throw std::invalid_argument("window vertex out of range");
  }
  Curve out;
  const auto states = trajectory(h, packet.state, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double mass = 0.0;
    for (Index x : window) mass += std::norm(states[i][x]) * mu[x];
    out.emplace_back(grid[i], mass);
  }
  return out;
}

std::string to_string(Equivalence e) {
  switch (e) {
    case Equivalence::equivalent: return "equivalent";
    case Equivalence::not_equivalent: return "not_equivalent";
    case Equivalence::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Equivalence equivalence_from_string(const std::string& s) {
  if (s == "equivalent") return Equivalence::equivalent;
  if (s == "not_equivalent") return Equivalence::not_equivalent;
  if (s == "inconclusive") return Equivalence::inconclusive;
  throw std::invalid_argument("unknown equivalence verdict '" + s + "'");
}

namespace {

void check_window(const TimeGrid& grid, const WavePacket& packet) {
  check_trusted(grid, packet);
  if (grid.size() < kMinimumGridPoints) {
    throw TrustedWindowError("window too short: " + std::to_string(grid.size()) +
                             " grid points before reflection, need " +
                             std::to_string(kMinimumGridPoints));
  }
}

void check_pair_dimension(const GraphPair& pair, const WavePacket& packet) {
  if (packet.state.size() != pair.rho.size()) {
    throw DimensionError("packet and graph pair differ in dimension");
  }
}

DecayResult decay_from_states(const GraphPair& pair, const std::vector<State>& states,
                              const TimeGrid& grid, double eps) {
  const auto& mu2 = pair.g2.mu();
  DecayResult result;
  double max_d = 0.0, min_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t x = 0; x < mu2.size(); ++x) {
      const double m = 1.0 - 1.0 / std::sqrt(pair.rho[x]);
      acc += m * m * std::norm(states[i][x]) * mu2[x];
    }
    const double d = std::sqrt(acc);
    result.decay.emplace_back(grid[i], d);
    max_d = std::max(max_d, d);
    min_d = std::min(min_d, d);
  }
  const double final_d = result.decay.back().second;
  if (final_d <= eps * max_d) {
    result.verdict = Equivalence::equivalent;
  } else if (min_d >= 0.5 * max_d) {
    result.verdict = Equivalence::not_equivalent;
  } else {
    result.verdict = Equivalence::inconclusive;
  }
  return result;
}

WaveOperatorEstimate wave_from_states(const GraphPair& pair, const LaplacianOperator& h2,
                                      const IdentificationOperator& j,
                                      const std::vector<State>& states,
                                      const TimeGrid& grid, double tol) {
  const auto& mu2 = pair.g2.mu();
  WaveOperatorEstimate est;
  State previous;
  std::vector<double> incs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    State w = evolve(h2, -grid[i], j.apply(states[i]));
    est.norms.emplace_back(grid[i], norm(w, mu2));
    if (i > 0) {
      State diff(w.size());
      for (std::size_t x = 0; x < w.size(); ++x) diff[x] = w[x] - previous[x];
      const double inc = norm(diff, mu2);
      est.increments.emplace_back(grid[i], inc);
      incs.push_back(inc);
    }
    previous = std::move(w);
  }
  est.final_state = previous;
  // Monotone decay over the last five points with the final step below tol.
  if (incs.size() >= 4 && incs.back() < tol) {
    bool monotone = true;
    for (std::size_t k = incs.size() - 3; k < incs.size(); ++k) {
      if (incs[k] > incs[k - 1] + 1e-12) monotone = false;
    }
    est.converged = monotone;
  }
  return est;
}

}  // namespace

DecayResult asymptotic_equivalence_test(const GraphPair& pair, const LaplacianOperator& h1,
                                        const WavePacket& packet, const TimeGrid& grid,
                                        double eps) {
  check_pair_dimension(pair, packet);
  check_window(grid, packet);
  return decay_from_states(pair, trajectory(h1, packet.state, grid), grid, eps);
}

WaveOperatorEstimate wave_operator_estimate(const GraphPair& pair,
                                            const LaplacianOperator& h1,
                                            const LaplacianOperator& h2,
                                            const IdentificationOperator& j,
                                            const WavePacket& packet,
                                            const TimeGrid& grid, double tol) {
  check_pair_dimension(pair, packet);
  check_window(grid, packet);
  if (h1.dimension() != h2.dimension()) {
    throw DimensionError("H1 and H2 live on different truncations");
  }
  return wave_from_states(pair, h2, j, trajectory(h1, packet.state, grid), grid, tol);
}

nlohmann::json EquivalenceReport::to_json() const {
  auto curve = [](const Curve& c) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [t, v] : c) out.push_back({t, v});
    return out;
  };
  return {{"decay_curve", curve(decay_curve)},
          {"wave_op_curves", {{"J", curve(cauchy_j)}, {"Jtilde", curve(cauchy_jtilde)}}},
          {"final_distance", final_distance},
          {"trusted_window", {0.0, trusted_time}},
          {"reflection_time_estimate", reflection_time_estimate},
          {"J_converged", j_converged},
          {"Jtilde_converged", jtilde_converged},
          {"verdict", to_string(verdict)},
          {"packet", packet}};
}

EquivalenceReport run_equivalence(const GraphPair& pair, const LaplacianOperator& h1,
                                  const LaplacianOperator& h2, const WavePacket& packet,
                                  const TimeGrid& grid, double eps, double tol) {
  check_pair_dimension(pair, packet);
  check_window(grid, packet);
  const auto states = trajectory(h1, packet.state, grid);
  const auto decay = decay_from_states(pair, states, grid, eps);
  const IdentificationOperator j(IdentificationOperator::Kind::unitary_J, pair);
  const IdentificationOperator jt(IdentificationOperator::Kind::trivial_Jtilde, pair);
  const auto wj = wave_from_states(pair, h2, j, states, grid, tol);
  const auto wjt = wave_from_states(pair, h2, jt, states, grid, tol);

  EquivalenceReport report;
  report.decay_curve = decay.decay;
  report.verdict = decay.verdict;
  report.cauchy_j = wj.increments;
  report.cauchy_jtilde = wjt.increments;
  report.j_converged = wj.converged;
  report.jtilde_converged = wjt.converged;
  State diff(wj.final_state.size());
  for (std::size_t x = 0; x < diff.size(); ++x) {
    diff[x] = wj.final_state[x] - wjt.final_state[x];
  }
  report.final_distance = norm(diff, pair.g2.mu());
  report.trusted_time = grid.back();
  report.reflection_time_estimate = packet.reflection_time_estimate;
  report.packet = packet.provenance();
  return report;
}

FilterDecay compactness_filter_decay(const LaplacianOperator& h,
                                     const std::vector<double>& multiplier,
                                     const WavePacket& packet, double l,
                                     const TimeGrid& grid, FilterOptions options) {
  if (!(l > 0.0)) throw std::invalid_argument("spectral window needs l > 0");
  if (static_cast<Index>(multiplier.size()) != h.dimension() ||
      packet.state.size() != multiplier.size()) {
    throw DimensionError("multiplier, packet and operator differ in dimension");
  }
  check_trusted(grid, packet);
  using Backend = FilterOptions::Backend;
  Backend backend = options.backend;
  if (backend == Backend::automatic) {
    backend = h.dimension() <= LaplacianOperator::kDenseLimit ? Backend::dense
                                                              : Backend::chebyshev;
  }
  FilterDecay out;
  State filtered;
  if (backend == Backend::dense) {
    if (h.dimension() > LaplacianOperator::kDenseLimit) {
      throw DimensionError("dense spectral window is limited to n <= 512");
    }
    SpectralDecomposition spectral(h);
    filtered = spectral.apply(
        [l](double lambda) { return Complex{std::abs(lambda) < l ? 1.0 : 0.0}; },
        packet.state);
    out.backend = "dense";
  } else {
    out.backend = "chebyshev";
    const double lambda_max = h.spectral_upper_bound();
    if (l > lambda_max) {
      filtered = packet.state;
    } else {
      const double w = options.sharpness * std::max(lambda_max, 1e-300);
      out.edge_width = w;
      auto window = [l, w](double lambda) {
        return 0.5 * (std::erf((lambda + l) / w) - std::erf((lambda - l) / w));
      };
      const auto series = interpolated_series(spectral_interval(h), window, 4096,
                                              kCoefficientTolerance);
      out.chebyshev_order = series.order();
      auto apply = [&h](std::span<const Complex> in, std::span<Complex> o, double c,
                        double r) { h.apply<Complex>(in, o, c, r); };
      filtered = chebyshev_apply<Complex>(series, packet.state, apply);
    }
  }
  const auto states = trajectory(h, filtered, grid);
  const auto& mu = h.graph().mu();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (std::size_t x = 0; x < mu.size(); ++x) {
      acc += multiplier[x] * multiplier[x] * std::norm(states[i][x]) * mu[x];
    }
    out.norms.emplace_back(grid[i], std::sqrt(acc));
  }
  return out;
}

}  // namespace scatterlab
