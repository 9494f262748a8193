#pragma once

#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "scatterlab/laplacian.hpp"

namespace scatterlab {

// J_0(z) .. J_order(z) by Miller's backward recurrence, normalized with
// J_0 + 2 sum_k J_2k = 1.
std::vector<double> bessel_j_sequence(double z, int order);

// exp(-z) I_0(z) .. exp(-z) I_order(z), z >= 0, normalized with
// I_0 + 2 sum_k I_k = exp(z).
std::vector<double> scaled_bessel_i_sequence(double z, int order);

// Bound on 2 sum_{k > order} (z/2)^k / k!, which dominates the truncated
// tail of both Bessel expansions (|J_k(z)| and exp(-z) I_k(z) are bounded by
// (z/2)^k / k!).
double bessel_tail_bound(double z, int order);

// Smallest order whose tail bound is <= tol.
int chebyshev_order_for(double z, double tol);

// Affine map of [center - half_width, center + half_width] onto [-1, 1].
struct SpectralInterval {
  double center = 0.0;
  double half_width = 0.0;
};

// [0, lambda_max] inflated by 1% on the top side of the half width.
SpectralInterval spectral_interval(const LaplacianOperator& h);

// f(H) ~ sum_k coeffs[k] T_k((H - center) / half_width).
struct ChebyshevSeries {
  SpectralInterval interval;
  std::vector<Complex> coeffs;
  double tail_bound = 0.0;

  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Coefficients of exp(-i t lambda) on the interval.
ChebyshevSeries unitary_series(SpectralInterval interval, double t, double tol);
// Coefficients of exp(-s lambda) on the interval, s >= 0.
ChebyshevSeries heat_series(SpectralInterval interval, double s, double tol);
// Coefficients of a smooth function by Chebyshev-Gauss interpolation at
// `nodes` points, truncated once |c_k| stays below tol.
ChebyshevSeries interpolated_series(SpectralInterval interval,
                                    const std::function<double(double)>& f,
                                    int nodes, double tol);

// Three-term recurrence; `apply(in, out, shift, scale)` must compute
// out = (H - shift) in / scale.
template <class T, class ApplyFn>
std::vector<T> chebyshev_apply(const ChebyshevSeries& series, std::span<const T> psi,
                               ApplyFn&& apply) {
  const std::size_t n = psi.size();
  auto coeff = [&](int k) -> T {
    if constexpr (std::is_same_v<T, double>) {
      return series.coeffs[k].real();
    } else {
      return series.coeffs[k];
    }
  };
  std::vector<T> result(n);
  std::vector<T> prev(psi.begin(), psi.end());
  for (std::size_t i = 0; i < n; ++i) result[i] = coeff(0) * prev[i];
  if (series.order() < 1) return result;

  const double c = series.interval.center;
  const double r = series.interval.half_width;
  std::vector<T> cur(n), next(n);
  apply(std::span<const T>(prev), std::span<T>(cur), c, r);
  {
    const T a = coeff(1);
    for (std::size_t i = 0; i < n; ++i) result[i] += a * cur[i];
  }
  for (int k = 2; k <= series.order(); ++k) {
    apply(std::span<const T>(cur), std::span<T>(next), c, r);
    const T a = coeff(k);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = 2.0 * next[i] - prev[i];
      result[i] += a * next[i];
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return result;
}

}  // namespace scatterlab
