#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

namespace wegnerflow {

/// Derivative of samples `v` over grid `l` at any index k. On a uniform
/// window of five samples around k (shifted inwards near the ends) the
/// fourth-order five-point stencil is used; otherwise the second-order
/// three-point stencil (one-sided at the ends). Needs n >= 3.
template <class T>
T sample_derivative(std::span<const double> l, std::span<const T> v, std::size_t k) {
  const std::size_t n = l.size();
  if (n >= 5) {
    const std::size_t lo = k < 2 ? 0 : (k + 2 >= n ? n - 5 : k - 2);
    const double h = (l[lo + 4] - l[lo]) / 4.0;
    bool uniform = h > 0.0;
    for (std::size_t i = lo; uniform && i < lo + 4; ++i) {
      uniform = std::abs((l[i + 1] - l[i]) - h) <= 1e-9 * h;
    }
    if (uniform) {
      // Weights for f'(x_{lo+p}) from f(x_lo .. x_lo+4), times 12h.
      static constexpr double w[5][5] = {{-25.0, 48.0, -36.0, 16.0, -3.0},
                                         {-3.0, -10.0, 18.0, -6.0, 1.0},
                                         {1.0, -8.0, 0.0, 8.0, -1.0},
                                         {-1.0, 6.0, -18.0, 10.0, 3.0},
                                         {3.0, -16.0, 36.0, -48.0, 25.0}};
      const std::size_t p = k - lo;
      T out = w[p][0] * v[lo];
      for (std::size_t i = 1; i < 5; ++i) out = out + w[p][i] * v[lo + i];
      return out / (12.0 * h);
    }
  }
  if (k == 0) {
    const double h1 = l[1] - l[0];
    const double h2 = l[2] - l[1];
    const double s = h1 + h2;
    T out = (-(2.0 * h1 + h2) / (h1 * s)) * v[0] + (s / (h1 * h2)) * v[1] - (h1 / (h2 * s)) * v[2];
    return out;
  }
  if (k + 1 == n) {
    const double h1 = l[n - 2] - l[n - 3];
    const double h2 = l[n - 1] - l[n - 2];
    const double s = h1 + h2;
    T out = (h2 / (h1 * s)) * v[n - 3] - (s / (h1 * h2)) * v[n - 2] +
            ((2.0 * h2 + h1) / (h2 * s)) * v[n - 1];
    return out;
  }
  const double h1 = l[k] - l[k - 1];
  const double h2 = l[k + 1] - l[k];
  T out = (-h2 / (h1 * (h1 + h2))) * v[k - 1] + ((h2 - h1) / (h1 * h2)) * v[k] +
          (h1 / (h2 * (h1 + h2))) * v[k + 1];
  return out;
}

/// sample_derivative restricted to interior indices (1 <= k <= n-2).
template <class T>
T central_derivative(std::span<const double> l, std::span<const T> v, std::size_t k) {
  return sample_derivative<T>(l, v, k);
}

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x <= 0.0) x += two_pi;
  return x - std::numbers::pi;
}

/// Representative of `x` modulo `period` closest to `reference`.
inline double unwrap_near(double x, double reference, double period) {
  return x + period * std::round((reference - x) / period);
}

}  // namespace wegnerflow
