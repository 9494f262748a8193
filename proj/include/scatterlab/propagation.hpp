#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "scatterlab/chebyshev.hpp"
#include "scatterlab/laplacian.hpp"

namespace scatterlab {

// Signals that t * half_width exceeds the configured polynomial budget; the
// caller should split the step.
class OrderOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kCoefficientTolerance = 1e-12;
// Largest t * half_width handled by a single plan.
inline constexpr double kMaxStepArgument = 500.0;

// Eigendecomposition of H through the symmetric similar matrix
// mu^{1/2} H mu^{-1/2}. Limited to n <= LaplacianOperator::kDenseLimit.
class SpectralDecomposition {
 public:
  explicit SpectralDecomposition(const LaplacianOperator& h);

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  // f(H) psi.
  State apply(const std::function<Complex(double)>& f,
              std::span<const Complex> psi) const;

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd sqrt_mu_;
};

// exp(-sH) psi by Chebyshev expansion, s > 0.
State heat_apply(const LaplacianOperator& h, double s, std::span<const Complex> psi);
std::vector<double> heat_apply_real(const LaplacianOperator& h, double s,
                                    std::span<const double> psi);

struct HeatKernelSlice {
  enum class Method { dense_eigen, chebyshev_real };
  Index source = 0;
  double time = 0.0;
  std::vector<double> values;  // k_s(source, y)
  Method method = Method::chebyshev_real;

  double min_value() const;
  // sum_y k_s(x,y) mu(y)
  double markov_sum(std::span<const double> mu) const;
  // Values with the numerical floor [-1e-12, 0) set to 0; throws when a value
  // lies below the floor.
  std::vector<double> clamped() const;
};

inline constexpr double kHeatNegativityFloor = -1e-12;

// Row k_s(x, .) of the heat kernel with respect to mu, i.e. exp(-sH)
// applied to delta_x / mu(x). The Chebyshev path works on the hop ball that
// the polynomial can reach, which is exact.
HeatKernelSlice heat_kernel_row(const LaplacianOperator& h, double s, Index x,
                                HeatKernelSlice::Method method =
                                    HeatKernelSlice::Method::chebyshev_real);

// phi(s,x) = sum_y |k_s(x,y)|^2 mu(y).
double phi(const LaplacianOperator& h, double s, Index x);
std::vector<double> phi_all(const LaplacianOperator& h, double s);
// The graph bound phi(s,x) <= 1/mu(x).
std::vector<double> phi_bound(const WeightedGraph& g);

struct PropagatorPlan {
  enum class Method { chebyshev, dense_eigen };
  const LaplacianOperator* h = nullptr;
  double time = 0.0;
  Method method = Method::chebyshev;
  ChebyshevSeries series;  // chebyshev only

  int chebyshev_order() const { return series.order(); }
  double coefficient_tail_bound() const { return series.tail_bound; }
  SpectralInterval shift_scale() const { return series.interval; }
};

// Throws OrderOverflow when |t| * half_width > kMaxStepArgument.
PropagatorPlan make_propagator_plan(const LaplacianOperator& h, double t,
                                    PropagatorPlan::Method method =
                                        PropagatorPlan::Method::chebyshev);

// exp(-itH) psi for the plan's t.
State unitary_apply(const PropagatorPlan& plan, std::span<const Complex> psi);

// exp(-itH) psi for any t, split into steps that respect kMaxStepArgument.
State evolve(const LaplacianOperator& h, double t, std::span<const Complex> psi);

}  // namespace scatterlab
