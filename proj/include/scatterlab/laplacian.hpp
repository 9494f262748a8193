#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "scatterlab/graph.hpp"

namespace scatterlab {

using Complex = std::complex<double>;
using State = std::vector<Complex>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// H_{b,mu} psi(x) = (1/mu(x)) sum_y b(x,y) (psi(x) - psi(y)), self-adjoint
// and nonnegative in l^2(X, mu).
class LaplacianOperator {
 public:
  explicit LaplacianOperator(WeightedGraph graph);

  const WeightedGraph& graph() const { return graph_; }
  Index dimension() const { return graph_.vertex_count(); }

  // Upper bound on the spectrum; the lower bound is 0.
  double spectral_upper_bound() const { return lambda_max_; }
  // False only when power-iteration refinement replaced the Gershgorin bound.
  bool bound_is_rigorous() const { return bound_rigorous_; }
  double gershgorin_bound() const { return gershgorin_; }

  // out = (H - shift) psi / scale. The plain apply uses shift 0, scale 1.
  template <class T>
  void apply(std::span<const T> psi, std::span<T> out, double shift = 0.0,
             double scale = 1.0) const;

  State apply(std::span<const Complex> psi) const;

  // Explicit (dense) matrix of H in the vertex basis; n <= kDenseLimit.
  Eigen::MatrixXd dense() const;

  static constexpr Index kDenseLimit = 512;

 private:
  WeightedGraph graph_;
  std::vector<double> degree_;   // sum_y b(x,y) / mu(x)
  std::vector<double> offdiag_;  // b(x,y) / mu(x), aligned with graph cols
  double gershgorin_ = 0.0;
  double lambda_max_ = 0.0;
  bool bound_rigorous_ = true;
};

template <class T>
void LaplacianOperator::apply(std::span<const T> psi, std::span<T> out,
                              double shift, double scale) const {
  const Index n = dimension();
  if (static_cast<Index>(psi.size()) != n || static_cast<Index>(out.size()) != n) {
    throw DimensionError("state dimension does not match the operator");
  }
  const auto& row_ptr = graph_.row_ptr();
  const auto& cols = graph_.cols();
  const double inv = 1.0 / scale;
  for (Index x = 0; x < n; ++x) {
    T acc = (degree_[x] - shift) * psi[x];
    for (Index k = row_ptr[x]; k < row_ptr[x + 1]; ++k) {
      acc -= offdiag_[k] * psi[cols[k]];
    }
    out[x] = acc * inv;
  }
}

// sum_x conj(psi(x)) phi(x) mu(x)
Complex inner_product(std::span<const Complex> psi, std::span<const Complex> phi,
                      std::span<const double> mu);
double norm(std::span<const Complex> psi, std::span<const double> mu);

// Identification operators between l^2(X, mu1) and l^2(X, mu2).
class IdentificationOperator {
 public:
  enum class Kind { unitary_J, trivial_Jtilde };

  IdentificationOperator(Kind kind, const GraphPair& pair);

  Kind kind() const { return kind_; }
  // Pointwise multiplier: 1/sqrt(rho) for J, 1 for J~.
  const std::vector<double>& diagonal() const { return diagonal_; }

  State apply(std::span<const Complex> psi) const;

 private:
  Kind kind_;
  std::vector<double> diagonal_;
};

}  // namespace scatterlab
