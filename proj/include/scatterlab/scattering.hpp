#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scatterlab/graph.hpp"
#include "scatterlab/laplacian.hpp"
#include "scatterlab/propagation.hpp"

namespace scatterlab {

class ScatteringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested time lies outside [0, reflection time) or the window holds too
// few grid points.
class TrustedWindowError : public ScatteringError {
 public:
  using ScatteringError::ScatteringError;
};

// Gaussian-modulated plane wave on a line-labelled graph, the finite-volume
// stand-in for an absolutely continuous state.
struct WavePacket {
  double momentum = 0.0;  // k in (0, pi); negated for time-reversed packets
  Label center = 0;
  double width = 1.0;
  State state;  // unit norm in l^2(X, mu_1)
  double reflection_time_estimate = 0.0;
  bool time_reversed = false;

  double group_speed() const;
  nlohmann::json provenance() const;
};

inline constexpr double kPacketMassFraction = 0.999;
inline constexpr double kPacketWindowWidths = 6.0;

// Throws ScatteringError when k is outside (0, pi), sigma <= 0, or the
// 6-sigma window does not fit in the graph with >= 99.9% of the mass.
WavePacket build_wave_packet(const WeightedGraph& g, double k, Label center, double sigma);

// Complex conjugate of the packet: the same envelope with momentum -k. Under
// a real H this maps exp(-itH) to exp(+itH).
WavePacket time_reversed(const WavePacket& packet);

// Mass of |psi|^2 mu inside |n - center| <= radius.
double window_mass(const WeightedGraph& g, std::span<const Complex> psi, Label center,
                   double radius);

using TimeGrid = std::vector<double>;

// {0, 1, 2, 4, ..., 2^i <= t_max, t_max}.
TimeGrid geometric_grid(double t_max);

// Throws TrustedWindowError unless all times are in [0, reflection time)
// and ascending.
void check_trusted(const TimeGrid& grid, const WavePacket& packet);

using Curve = std::vector<std::pair<double, double>>;
std::string curve_to_csv(const Curve& curve);

// exp(-itH) psi at every grid time, evolved step by step.
std::vector<State> trajectory(const LaplacianOperator& h, std::span<const Complex> psi,
                              const TimeGrid& grid);

// Mass sum_{x in K} |exp(-itH) psi(x)|^2 mu(x) over the grid.
Curve rage_decay(const LaplacianOperator& h, const WavePacket& packet,
                 const std::vector<Index>& window, const TimeGrid& grid);

// Vertices with |label - center| <= radius.
std::vector<Index> label_window(const WeightedGraph& g, Label center, double radius);

enum class Equivalence { equivalent, not_equivalent, inconclusive };
std::string to_string(Equivalence e);
Equivalence equivalence_from_string(const std::string& s);

inline constexpr double kDefaultEquivalenceEps = 0.05;
inline constexpr double kDefaultCauchyTol = 1e-3;
inline constexpr std::size_t kMinimumGridPoints = 10;

struct DecayResult {
  Curve decay;  // (t, D(t)) with D(t) = ||(J~ - J) exp(-itH_1) psi||_{mu_2}
  Equivalence verdict = Equivalence::inconclusive;
};

// D(t) over the grid. Verdict: equivalent if D(T) <= eps * max D, not
// equivalent if D(t) >= max D / 2 on the whole grid, else inconclusive.
DecayResult asymptotic_equivalence_test(const GraphPair& pair, const LaplacianOperator& h1,
                                        const WavePacket& packet, const TimeGrid& grid,
                                        double eps = kDefaultEquivalenceEps);

struct WaveOperatorEstimate {
  State final_state;  // W(T) psi = exp(iTH_2) J exp(-iTH_1) psi
  Curve increments;   // (t_{i+1}, ||W(t_{i+1})psi - W(t_i)psi||_{mu_2})
  Curve norms;        // (t, ||W(t) psi||_{mu_2})
  bool converged = false;
};

WaveOperatorEstimate wave_operator_estimate(const GraphPair& pair,
                                            const LaplacianOperator& h1,
                                            const LaplacianOperator& h2,
                                            const IdentificationOperator& j,
                                            const WavePacket& packet,
                                            const TimeGrid& grid,
                                            double tol = kDefaultCauchyTol);

struct EquivalenceReport {
  Curve decay_curve;
  Curve cauchy_j;
  Curve cauchy_jtilde;
  double final_distance = 0.0;
  double trusted_time = 0.0;
  double reflection_time_estimate = 0.0;
  bool j_converged = false;
  bool jtilde_converged = false;
  Equivalence verdict = Equivalence::inconclusive;
  nlohmann::json packet;

  nlohmann::json to_json() const;
};

EquivalenceReport run_equivalence(const GraphPair& pair, const LaplacianOperator& h1,
                                  const LaplacianOperator& h2, const WavePacket& packet,
                                  const TimeGrid& grid, double eps = kDefaultEquivalenceEps,
                                  double tol = kDefaultCauchyTol);

struct FilterOptions {
  enum class Backend { automatic, dense, chebyshev };
  Backend backend = Backend::automatic;
  // Width of the erf edges of the smoothed window, relative to lambda_max.
  double sharpness = 0.02;
};

struct FilterDecay {
  Curve norms;  // (t, ||D E(-l,l) exp(-itH) psi||_mu)
  std::string backend;
  double edge_width = 0.0;
  int chebyshev_order = 0;
};

// Throws DimensionError when the dense backend is forced above n = 512.
FilterDecay compactness_filter_decay(const LaplacianOperator& h,
                                     const std::vector<double>& multiplier,
                                     const WavePacket& packet, double l,
                                     const TimeGrid& grid, FilterOptions options = {});

}  // namespace scatterlab
