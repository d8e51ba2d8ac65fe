#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "relsim/error.hpp"
#include "relsim/expr.hpp"

namespace relsim {

// Embedded Dormand-Prince 5(4) stepper. The fifth-order solution propagates;
// the fourth-order weights provide the error estimate. Steps are clamped so
// integration lands exactly on each requested sample point.
struct StepControls {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0: span / 1000
  double fixed_step = 0.0;    // > 0 disables error control
  long max_steps = 2'000'000;
};

namespace rk_detail {

inline constexpr double kA21 = 1.0 / 5;
inline constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
inline constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
inline constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                        kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
inline constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                        kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                        kA65 = -5103.0 / 18656;
inline constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                        kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
inline constexpr double kE1 = 5179.0 / 57600, kE3 = 7571.0 / 16695,
                        kE4 = 393.0 / 640, kE5 = -92097.0 / 339200,
                        kE6 = 187.0 / 2100, kE7 = 1.0 / 40;
inline constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5,
                        kC5 = 8.0 / 9;

}  // namespace rk_detail

// F:           dy/dx = f(x, y) -> std::array<double, N>
// OnSample:    called at every requested grid point (including x0)
// AfterAccept: called after each accepted step; may adjust y in place
template <std::size_t N, class F, class OnSample, class AfterAccept>
void rk45_drive(F&& f, double x0, std::array<double, N> y, double x1, int n_samples,
                const StepControls& ctl, OnSample&& on_sample,
                AfterAccept&& after_accept) {
  using namespace rk_detail;
  using Y = std::array<double, N>;

  const double span = x1 - x0;
  if (!(span > 0.0))
    throw Error(ErrorCode::ConfigError, "integration horizon must be positive");
  if (n_samples < 1) n_samples = 1;

  double h = ctl.fixed_step > 0.0
                 ? ctl.fixed_step
                 : (ctl.initial_step > 0.0 ? ctl.initial_step : span / 1000.0);
  const double h_min = 1e-14 * span;
  const bool adaptive = ctl.fixed_step <= 0.0;

  double x = x0;
  long steps = 0;
  on_sample(x, y);

  auto wrap = [&x](const Error& e) -> Error {
    return Error(e.code(), std::string(e.what()) + " [at parameter " +
                               format_double(x) + "]");
  };

  for (int k = 1; k <= n_samples; ++k) {
    const double target = x0 + span * static_cast<double>(k) / n_samples;
    while (x < target) {
      // Roundoff sliver left after clamped steps; advancing the state over it
      // is below any tolerance in play.
      if (target - x <= 1e-13 * span) {
        x = target;
        break;
      }
      if (++steps > ctl.max_steps)
        throw Error(ErrorCode::StepSizeUnderflow,
                    "step budget exhausted at parameter " + format_double(x));
      bool clipped = false;
      double hs = h;
      if (x + hs >= target) {
        hs = target - x;
        clipped = true;
      }
      if (hs < h_min && !clipped)
        throw Error(ErrorCode::StepSizeUnderflow,
                    "step size underflow at parameter " + format_double(x));

      Y k1, k2, k3, k4, k5, k6, k7, yt, y5;
      try {
        k1 = f(x, y);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * kA21 * k1[i];
        k2 = f(x + kC2 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
          yt[i] = y[i] + hs * (kA31 * k1[i] + kA32 * k2[i]);
        k3 = f(x + kC3 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
          yt[i] = y[i] + hs * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
        k4 = f(x + kC4 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
          yt[i] = y[i] + hs * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] +
                               kA54 * k4[i]);
        k5 = f(x + kC5 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
          yt[i] = y[i] + hs * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                               kA64 * k4[i] + kA65 * k5[i]);
        k6 = f(x + hs, yt);
        for (std::size_t i = 0; i < N; ++i)
          y5[i] = y[i] + hs * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                               kB5 * k5[i] + kB6 * k6[i]);
        k7 = f(x + hs, y5);
      } catch (const Error& e) {
        throw wrap(e);
      }

      if (adaptive) {
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
          double y4 = y[i] + hs * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                                   kE5 * k5[i] + kE6 * k6[i] + kE7 * k7[i]);
          double scale =
              ctl.abs_tol + ctl.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
          double e = (y5[i] - y4) / scale;
          err += e * e;
        }
        err = std::sqrt(err / N);
        if (err > 1.0) {
          h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
          continue;
        }
        double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = hs * std::min(5.0, std::max(0.2, grow));
      }

      x = clipped ? target : x + hs;
      y = y5;
      try {
        after_accept(x, y);
      } catch (const Error& e) {
        throw wrap(e);
      }
    }
    on_sample(target, y);
  }
}

}  // namespace relsim
