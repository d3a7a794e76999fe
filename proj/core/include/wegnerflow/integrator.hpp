#pragma once

// Explicit Runge-Kutta steppers for matrix-valued ODEs dy/dl = f(l, y).
// Fixed-step classical RK4 and adaptive Dormand-Prince 5(4) with FSAL.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <variant>

#include "wegnerflow/error.hpp"
#include "wegnerflow/operator.hpp"

namespace wegnerflow::ode {

using State = Matrix;

struct FixedRk4 {
  double step = 1e-3;
};

struct AdaptiveRk45 {
  double rtol = 1e-9;
  double atol = 1e-12;
  double min_step = 1e-14;
  double max_step = 1.0;
};

using Integrator = std::variant<FixedRk4, AdaptiveRk45>;

/// max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))
inline double scaled_error(const State& err, const State& y0, const State& y1, double rtol,
                           double atol) {
  const auto scale =
      (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).eval();
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

class Stepper {
 public:
  explicit Stepper(Integrator method) : method_(method) {}

  /// Takes one accepted step of length <= h_limit from (l, y); updates y and
  /// returns the step length. Throws IntegratorFailure on step underflow or
  /// a non-finite state.
  template <class Rhs>
  double advance(Rhs&& f, double l, State& y, double h_limit) {
    if (const auto* rk4 = std::get_if<FixedRk4>(&method_)) {
      const double h = std::min(rk4->step, h_limit);
      rk4_step(f, l, y, h);
      fsal_.reset();
      return h;
    }
    return dopri_step(f, l, y, h_limit, std::get<AdaptiveRk45>(method_));
  }

  /// Integrates from l0 to l1 in place.
  template <class Rhs>
  void integrate_to(Rhs&& f, double l0, State& y, double l1) {
    double l = l0;
    while (l1 - l > 1e-15 * std::max(1.0, std::abs(l1))) {
      l += advance(f, l, y, l1 - l);
    }
  }

  std::size_t rhs_evaluations() const { return evaluations_; }

 private:
  template <class Rhs>
  void rk4_step(Rhs& f, double l, State& y, double h) {
    const State k1 = f(l, y);
    const State k2 = f(l + 0.5 * h, (y + 0.5 * h * k1).eval());
    const State k3 = f(l + 0.5 * h, (y + 0.5 * h * k2).eval());
    const State k4 = f(l + h, (y + h * k3).eval());
    evaluations_ += 4;
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(y, l + h);
  }

  template <class Rhs>
  double dopri_step(Rhs& f, double l, State& y, double h_limit, const AdaptiveRk45& opt) {
    // Dormand & Prince (1980) tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (!fsal_ || fsal_l_ != l) {
      fsal_ = f(l, y);
      fsal_l_ = l;
      ++evaluations_;
    }
    const State k1 = *fsal_;
    if (!h_) h_ = initial_step(y, k1, opt);

    for (;;) {
      double h = std::min({*h_, h_limit, opt.max_step});
      if (h < opt.min_step && h < h_limit) {
        std::ostringstream os;
        os << "adaptive step underflow at l = " << l << " (h = " << h << ")";
        throw Error(ErrorCode::IntegratorFailure, os.str());
      }
      const State k2 = f(l + c2 * h, (y + h * a21 * k1).eval());
      const State k3 = f(l + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
      const State k4 = f(l + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
      const State k5 =
          f(l + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
      const State k6 =
          f(l + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
      State y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const State k7 = f(l + h, y1);
      evaluations_ += 6;
      const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double en = scaled_error(err, y, y1, opt.rtol, opt.atol);

      if (std::isfinite(en) && en <= 1.0) {
        const double grow = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        // a step clipped by h_limit says nothing about the controller's size
        if (h == *h_ || grow < 1.0) h_ = h * grow;
        y = std::move(y1);
        check_finite(y, l + h);
        fsal_ = k7;
        fsal_l_ = l + h;
        return h;
      }
      const double shrink = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1;
      h_ = h * shrink;
    }
  }

  static double initial_step(const State& y, const State& dy, const AdaptiveRk45& opt) {
    const double ny = max_abs(y);
    const double nd = max_abs(dy);
    if (nd == 0.0) return opt.max_step;
    return std::clamp(0.01 * std::max(ny, opt.atol) / nd, opt.min_step, opt.max_step);
  }

  static void check_finite(const State& y, double l) {
    if (!all_finite(y)) {
      std::ostringstream os;
      os << "state became non-finite at l = " << l;
      throw Error(ErrorCode::IntegratorFailure, os.str());
    }
  }

  Integrator method_;
  std::optional<double> h_;
  std::optional<State> fsal_;
  double fsal_l_ = 0.0;
  std::size_t evaluations_ = 0;
};

}  // namespace wegnerflow::ode
