#include "scatterlab/laplacian.hpp"

#include <algorithm>
#include <cmath>

namespace scatterlab {

namespace {

constexpr double kRefineThreshold = 1e3;
constexpr int kPowerIterations = 50;

}  // namespace

LaplacianOperator::LaplacianOperator(WeightedGraph graph)
    : graph_(std::move(graph)) {
  const Index n = graph_.vertex_count();
  const auto& mu = graph_.mu();
  const auto& row_ptr = graph_.row_ptr();
  const auto& w = graph_.all_weights();
  degree_.resize(n);
  offdiag_.resize(w.size());
  for (Index x = 0; x < n; ++x) {
    degree_[x] = graph_.row_sum(x) / mu[x];
    for (Index k = row_ptr[x]; k < row_ptr[x + 1]; ++k) {
      offdiag_[k] = w[k] / mu[x];
    }
  }
  gershgorin_ =
      n == 0 ? 0.0 : 2.0 * *std::max_element(degree_.begin(), degree_.end());
  lambda_max_ = gershgorin_;

  if (gershgorin_ > kRefineThreshold) {
    // Power iteration in the symmetrized frame mu^{1/2} H mu^{-1/2}; the
    // Rayleigh quotient plus residual, padded by 5%, replaces the bound when
    // it is smaller.
    std::vector<double> v(n), hv(n), tmp(n);
    for (Index x = 0; x < n; ++x) v[x] = 1.0 + 0.5 * std::sin(1.0 + x);
    double theta = 0.0, residual = 0.0;
    for (int it = 0; it < kPowerIterations; ++it) {
      double nv = 0.0;
      for (double c : v) nv += c * c;
      nv = std::sqrt(nv);
      for (double& c : v) c /= nv;
      for (Index x = 0; x < n; ++x) tmp[x] = v[x] / std::sqrt(mu[x]);
      apply<double>(tmp, hv);
      for (Index x = 0; x < n; ++x) hv[x] *= std::sqrt(mu[x]);
      theta = 0.0;
      for (Index x = 0; x < n; ++x) theta += v[x] * hv[x];
      residual = 0.0;
      for (Index x = 0; x < n; ++x) {
        residual += (hv[x] - theta * v[x]) * (hv[x] - theta * v[x]);
      }
      residual = std::sqrt(residual);
      v = hv;
    }
    const double refined = 1.05 * (theta + residual);
    if (refined < gershgorin_) {
      lambda_max_ = refined;
      bound_rigorous_ = false;
    }
  }
}

State LaplacianOperator::apply(std::span<const Complex> psi) const {
  State out(psi.size());
  apply<Complex>(psi, out);
  return out;
}

Eigen::MatrixXd LaplacianOperator::dense() const {
  const Index n = dimension();
  if (n > kDenseLimit) {
    throw DimensionError("dense assembly is limited to n <= 512");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  const auto& row_ptr = graph_.row_ptr();
  const auto& cols = graph_.cols();
  for (Index x = 0; x < n; ++x) {
    h(x, x) = degree_[x];
    for (Index k = row_ptr[x]; k < row_ptr[x + 1]; ++k) {
      h(x, cols[k]) -= offdiag_[k];
    }
  }
  return h;
}

Complex inner_product(std::span<const Complex> psi, std::span<const Complex> phi,
                      std::span<const double> mu) {
  if (psi.size() != phi.size() || psi.size() != mu.size()) {
    throw DimensionError("inner product of vectors with different dimensions");
  }
  Complex acc{0.0, 0.0};
  for (std::size_t x = 0; x < psi.size(); ++x) {
    acc += std::conj(psi[x]) * phi[x] * mu[x];
  }
  return acc;
}

double norm(std::span<const Complex> psi, std::span<const double> mu) {
  if (psi.size() != mu.size()) {
    throw DimensionError("norm of a vector with the wrong dimension");
  }
  double acc = 0.0;
  for (std::size_t x = 0; x < psi.size(); ++x) acc += std::norm(psi[x]) * mu[x];
  return std::sqrt(acc);
}

IdentificationOperator::IdentificationOperator(Kind kind, const GraphPair& pair)
    : kind_(kind), diagonal_(pair.rho.size(), 1.0) {
  if (kind_ == Kind::unitary_J) {
    for (std::size_t x = 0; x < pair.rho.size(); ++x) {
      diagonal_[x] = 1.0 / std::sqrt(pair.rho[x]);
    }
  }
}

State IdentificationOperator::apply(std::span<const Complex> psi) const {
  if (psi.size() != diagonal_.size()) {
    throw DimensionError("identification applied to a state of wrong dimension");
  }
  State out(psi.size());
  for (std::size_t x = 0; x < psi.size(); ++x) out[x] = diagonal_[x] * psi[x];
  return out;
}

}  // namespace scatterlab
