#include "scatterlab/chebyshev.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scatterlab {

namespace {

constexpr double kRescaleAbove = 1e250;

int miller_start(double z, int order) {
  const double top = std::max(static_cast<double>(order), z);
  int m = static_cast<int>(top + 20.0 + std::ceil(std::sqrt(40.0 * (top + 1.0))));
  return m + (m % 2);
}

}  // namespace

std::vector<double> bessel_j_sequence(double z, int order) {
  if (order < 0) throw std::invalid_argument("negative Bessel order");
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const bool negative = z < 0.0;
  const double a = std::abs(z);
  const int start = miller_start(a, order);
  double above = 0.0, here = 1e-300, sum = 0.0;
  for (int k = start; k >= 0; --k) {
    if (k <= order) out[k] = here;
    if (k % 2 == 0) sum += (k == 0 ? 1.0 : 2.0) * here;
    if (k == 0) break;
    const double below = (2.0 * k / a) * here - above;
    above = here;
    here = below;
    if (std::abs(here) > kRescaleAbove) {
      here /= kRescaleAbove;
      above /= kRescaleAbove;
      sum /= kRescaleAbove;
      for (int j = k; j <= order; ++j) out[j] /= kRescaleAbove;
    }
  }
  for (double& v : out) v /= sum;
  if (negative) {
    for (int k = 1; k <= order; k += 2) out[k] = -out[k];
  }
  return out;
}

std::vector<double> scaled_bessel_i_sequence(double z, int order) {
  if (order < 0) throw std::invalid_argument("negative Bessel order");
  if (z < 0.0) throw std::invalid_argument("scaled I sequence needs z >= 0");
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int start = miller_start(z, order);
  double above = 0.0, here = 1e-300, sum = 0.0;
  for (int k = start; k >= 0; --k) {
    if (k <= order) out[k] = here;
    sum += (k == 0 ? 1.0 : 2.0) * here;
    if (k == 0) break;
    const double below = (2.0 * k / z) * here + above;
    above = here;
    here = below;
    if (here > kRescaleAbove) {
      here /= kRescaleAbove;
      above /= kRescaleAbove;
      sum /= kRescaleAbove;
      for (int j = k; j <= order; ++j) out[j] /= kRescaleAbove;
    }
  }
  for (double& v : out) v /= sum;
  return out;
}

double bessel_tail_bound(double z, int order) {
  const double half = std::abs(z) / 2.0;
  if (half == 0.0) return 0.0;
  const double k = order + 1.0;
  const double q = half / (k + 1.0);
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  const double log_term = k * std::log(half) - std::lgamma(k + 1.0);
  return 2.0 * std::exp(log_term) / (1.0 - q);
}

int chebyshev_order_for(double z, double tol) {
  int order = 0;
  while (bessel_tail_bound(z, order) > tol) ++order;
  return order;
}

SpectralInterval spectral_interval(const LaplacianOperator& h) {
  const double lambda = h.spectral_upper_bound();
  return {0.5 * lambda, 1.01 * 0.5 * lambda};
}

ChebyshevSeries unitary_series(SpectralInterval interval, double t, double tol) {
  const double z = t * interval.half_width;
  const int order = chebyshev_order_for(z, tol);
  const auto j = bessel_j_sequence(z, order);
  ChebyshevSeries s;
  s.interval = interval;
  s.tail_bound = bessel_tail_bound(z, order);
  s.coeffs.resize(static_cast<std::size_t>(order) + 1);
  // exp(-i t (c + r x)) = exp(-i t c) sum_k (2 - delta_k0) (-i)^k J_k(t r) T_k(x)
  const Complex phase = std::polar(1.0, -t * interval.center);
  Complex minus_i_pow{1.0, 0.0};
  for (int k = 0; k <= order; ++k) {
    s.coeffs[k] = (k == 0 ? 1.0 : 2.0) * phase * minus_i_pow * j[k];
    minus_i_pow *= Complex{0.0, -1.0};
  }
  return s;
}

ChebyshevSeries heat_series(SpectralInterval interval, double s, double tol) {
  if (s < 0.0) throw std::invalid_argument("heat series needs s >= 0");
  const double z = s * interval.half_width;
  // exp(-s (c + r x)) = exp(-s (c - r)) sum_k (2 - delta_k0) (-1)^k
  //                     [exp(-z) I_k(z)] T_k(x)
  const double prefactor = std::exp(-s * (interval.center - interval.half_width));
  const int order = chebyshev_order_for(z, tol / prefactor);
  const auto i = scaled_bessel_i_sequence(z, order);
  ChebyshevSeries out;
  out.interval = interval;
  out.tail_bound = prefactor * bessel_tail_bound(z, order);
  out.coeffs.resize(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    out.coeffs[k] = (k == 0 ? 1.0 : 2.0) * sign * prefactor * i[k];
  }
  return out;
}

ChebyshevSeries interpolated_series(SpectralInterval interval,
                                    const std::function<double(double)>& f,
                                    int nodes, double tol) {
  if (nodes < 2) throw std::invalid_argument("need at least two nodes");
  std::vector<double> values(static_cast<std::size_t>(nodes));
  for (int j = 0; j < nodes; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / nodes;
    values[j] = f(interval.center + interval.half_width * std::cos(theta));
  }
  std::vector<double> c(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) {
    double acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
      acc += values[j] * std::cos(std::numbers::pi * k * (j + 0.5) / nodes);
    }
    c[k] = (k == 0 ? 1.0 : 2.0) * acc / nodes;
  }
  int last = nodes - 1;
  while (last > 0 && std::abs(c[last]) < tol) --last;
  ChebyshevSeries out;
  out.interval = interval;
  double tail = 0.0;
  for (int k = last + 1; k < nodes; ++k) tail += std::abs(c[k]);
  out.tail_bound = tail;
  out.coeffs.assign(c.begin(), c.begin() + last + 1);
  return out;
}

}  // namespace scatterlab
