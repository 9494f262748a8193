#include "scatterlab/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Eigenvalues>

namespace scatterlab {

SpectralDecomposition::SpectralDecomposition(const LaplacianOperator& h) {
  const Index n = h.dimension();
  if (n > LaplacianOperator::kDenseLimit) {
    throw DimensionError("dense spectral decomposition is limited to n <= 512");
  }
  const auto& mu = h.graph().mu();
  sqrt_mu_.resize(n);
  for (Index x = 0; x < n; ++x) sqrt_mu_[x] = std::sqrt(mu[x]);
  Eigen::MatrixXd sym = sqrt_mu_.asDiagonal() * h.dense() *
                        sqrt_mu_.cwiseInverse().asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("dense eigensolver failed");
  }
  eigenvalues_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

State SpectralDecomposition::apply(const std::function<Complex(double)>& f,
                                   std::span<const Complex> psi) const {
  const Eigen::Index n = eigenvalues_.size();
  if (static_cast<Eigen::Index>(psi.size()) != n) {
    throw DimensionError("state dimension does not match the decomposition");
  }
  Eigen::VectorXcd v(n);
  for (Eigen::Index x = 0; x < n; ++x) v[x] = sqrt_mu_[x] * psi[x];
  Eigen::VectorXcd coeffs = vectors_.transpose() * v;
  for (Eigen::Index k = 0; k < n; ++k) coeffs[k] *= f(eigenvalues_[k]);
  Eigen::VectorXcd back = vectors_ * coeffs;
  State out(psi.size());
  for (Eigen::Index x = 0; x < n; ++x) out[x] = back[x] / sqrt_mu_[x];
  return out;
}

namespace {

template <class T>
std::vector<T> heat_chebyshev(const LaplacianOperator& h, double s,
                              std::span<const T> psi) {
  if (!(s > 0.0)) throw std::invalid_argument("heat time must be positive");
  const auto interval = spectral_interval(h);
  auto apply = [&h](std::span<const T> in, std::span<T> out, double c, double r) {
    h.apply<T>(in, out, c, r);
  };
  // Steps obey the same polynomial budget as the unitary propagator.
  const double total = s * interval.half_width;
  const int steps = std::max(1, static_cast<int>(std::ceil(total / kMaxStepArgument)));
  const auto series = heat_series(interval, s / steps, kCoefficientTolerance);
  std::vector<T> cur(psi.begin(), psi.end());
  for (int i = 0; i < steps; ++i) {
    cur = chebyshev_apply<T>(series, std::span<const T>(cur), apply);
  }
  return cur;
}

// Vertices within `radius` hops of x, in BFS order (x first).
std::vector<Index> hop_ball(const WeightedGraph& g, Index x, int radius) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::vector<Index> order{x};
  dist[x] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Index v = order[head];
    if (dist[v] == radius) continue;
    for (Index y : g.neighbors(v)) {
      if (dist[y] < 0) {
        dist[y] = dist[v] + 1;
        order.push_back(y);
      }
    }
  }
  return order;
}

}  // namespace

State heat_apply(const LaplacianOperator& h, double s, std::span<const Complex> psi) {
  if (static_cast<Index>(psi.size()) != h.dimension()) {
    throw DimensionError("state dimension does not match the operator");
  }
  return heat_chebyshev<Complex>(h, s, psi);
}

std::vector<double> heat_apply_real(const LaplacianOperator& h, double s,
                                    std::span<const double> psi) {
  if (static_cast<Index>(psi.size()) != h.dimension()) {
    throw DimensionError("state dimension does not match the operator");
  }
  return heat_chebyshev<double>(h, s, psi);
}

double HeatKernelSlice::min_value() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

double HeatKernelSlice::markov_sum(std::span<const double> mu) const {
  double acc = 0.0;
  for (std::size_t y = 0; y < values.size(); ++y) acc += values[y] * mu[y];
  return acc;
}

std::vector<double> HeatKernelSlice::clamped() const {
  std::vector<double> out(values);
  for (double& v : out) {
    if (v < kHeatNegativityFloor) {
      throw std::runtime_error("heat kernel value below the negativity floor");
    }
    v = std::max(v, 0.0);
  }
  return out;
}

HeatKernelSlice heat_kernel_row(const LaplacianOperator& h, double s, Index x,
                                HeatKernelSlice::Method method) {
  if (!(s > 0.0)) throw std::invalid_argument("heat time must be positive");
  const Index n = h.dimension();
  if (x < 0 || x >= n) throw std::invalid_argument("source vertex out of range");
  const auto& g = h.graph();
  HeatKernelSlice slice;
  slice.source = x;
  slice.time = s;
  slice.method = method;

  if (method == HeatKernelSlice::Method::dense_eigen) {
    SpectralDecomposition spectral(h);
    State delta(static_cast<std::size_t>(n), Complex{});
    delta[x] = 1.0 / g.mu()[x];
    auto row = spectral.apply([s](double l) { return Complex{std::exp(-s * l)}; },
                              delta);
    slice.values.resize(n);
    for (Index y = 0; y < n; ++y) slice.values[y] = row[y].real();
    return slice;
  }

  const auto interval = spectral_interval(h);
  const double total = s * interval.half_width;
  const int steps = std::max(1, static_cast<int>(std::ceil(total / kMaxStepArgument)));
  const auto series = heat_series(interval, s / steps, kCoefficientTolerance);
  const int reach = steps * series.order();

  // T_k(delta_x) vanishes beyond k hops, so the recurrence restricted to the
  // reach ball (keeping full diagonal degrees) reproduces the global one.
  const auto ball = hop_ball(g, x, reach);
  if (static_cast<Index>(ball.size()) * 2 > n) {
    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    delta[x] = 1.0 / g.mu()[x];
    slice.values = heat_chebyshev<double>(h, s, delta);
    return slice;
  }
  const Index m = static_cast<Index>(ball.size());
  std::vector<Index> local(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < m; ++i) local[ball[i]] = i;
  std::vector<Index> row_ptr{0};
  std::vector<Index> cols;
  std::vector<double> offdiag;
  std::vector<double> degree(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const Index v = ball[i];
    degree[i] = g.row_sum(v) / g.mu()[v];
    auto nb = g.neighbors(v);
    auto w = g.weights(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (local[nb[k]] >= 0) {
        cols.push_back(local[nb[k]]);
        offdiag.push_back(w[k] / g.mu()[v]);
      }
    }
    row_ptr.push_back(static_cast<Index>(cols.size()));
  }
  auto apply = [&](std::span<const double> in, std::span<double> out, double c,
                   double r) {
    const double inv = 1.0 / r;
    for (Index i = 0; i < m; ++i) {
      double acc = (degree[i] - c) * in[i];
      for (Index k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc -= offdiag[k] * in[cols[k]];
      out[i] = acc * inv;
    }
  };
  std::vector<double> cur(static_cast<std::size_t>(m), 0.0);
  cur[0] = 1.0 / g.mu()[x];
  for (int i = 0; i < steps; ++i) {
    cur = chebyshev_apply<double>(series, std::span<const double>(cur), apply);
  }
  slice.values.assign(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < m; ++i) slice.values[ball[i]] = cur[i];
  return slice;
}

double phi(const LaplacianOperator& h, double s, Index x) {
  const auto row = heat_kernel_row(h, s, x);
  const auto& mu = h.graph().mu();
  double acc = 0.0;
  for (std::size_t y = 0; y < row.values.size(); ++y) {
    acc += row.values[y] * row.values[y] * mu[y];
  }
  return acc;
}

std::vector<double> phi_all(const LaplacianOperator& h, double s) {
  std::vector<double> out(static_cast<std::size_t>(h.dimension()));
  for (Index x = 0; x < h.dimension(); ++x) out[x] = phi(h, s, x);
  return out;
}

std::vector<double> phi_bound(const WeightedGraph& g) {
  std::vector<double> out(g.mu().size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = 1.0 / g.mu()[x];
  return out;
}

PropagatorPlan make_propagator_plan(const LaplacianOperator& h, double t,
                                    PropagatorPlan::Method method) {
  PropagatorPlan plan;
  plan.h = &h;
  plan.time = t;
  plan.method = method;
  const auto interval = spectral_interval(h);
  if (method == PropagatorPlan::Method::chebyshev) {
    if (std::abs(t) * interval.half_width > kMaxStepArgument) {
      throw OrderOverflow("t * half_width = " +
                          std::to_string(std::abs(t) * interval.half_width) +
                          " exceeds the single-step budget; split the step");
    }
    plan.series = unitary_series(interval, t, kCoefficientTolerance);
  } else {
    plan.series.interval = interval;
  }
  return plan;
}

State unitary_apply(const PropagatorPlan& plan, std::span<const Complex> psi) {
  const LaplacianOperator& h = *plan.h;
  if (static_cast<Index>(psi.size()) != h.dimension()) {
    throw DimensionError("state dimension does not match the operator");
  }
  if (plan.method == PropagatorPlan::Method::dense_eigen) {
    SpectralDecomposition spectral(h);
    const double t = plan.time;
    return spectral.apply([t](double l) { return std::polar(1.0, -t * l); }, psi);
  }
  auto apply = [&h](std::span<const Complex> in, std::span<Complex> out, double c,
                    double r) { h.apply<Complex>(in, out, c, r); };
  return chebyshev_apply<Complex>(plan.series, psi, apply);
}

State evolve(const LaplacianOperator& h, double t, std::span<const Complex> psi) {
  const double r = spectral_interval(h).half_width;
  const double total = std::abs(t) * r;
  const int steps = std::max(1, static_cast<int>(std::ceil(total / kMaxStepArgument)));
  const auto plan = make_propagator_plan(h, t / steps);
  State cur(psi.begin(), psi.end());
  for (int i = 0; i < steps; ++i) cur = unitary_apply(plan, cur);
  return cur;
}

}  // namespace scatterlab
