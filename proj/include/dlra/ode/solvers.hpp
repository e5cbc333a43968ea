#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "dlra/core/common.hpp"

namespace dlra {

enum class OdeMethod { heun, rk4, embedded45 };

inline const char* to_string(OdeMethod m) {
  switch (m) {
    case OdeMethod::heun: return "heun";
    case OdeMethod::rk4: return "rk4";
    case OdeMethod::embedded45: return "embedded45";
  }
  return "?";
}

/// Substep time-integration configuration. heun/rk4 take `substeps` equal
/// steps across the interval; embedded45 is a Dormand-Prince 4(5) pair with
/// PI step control (safety 0.9, growth clamp [0.2, 5]).
struct SolverConfig {
  OdeMethod method = OdeMethod::embedded45;
  int substeps = 1;
  double rtol = 1e-10;
  double atol = 1e-10;
  long max_steps = 1000000;

  void check() const {
    DLRA_REQUIRE(substeps >= 1, "solver: substeps must be >= 1");
    DLRA_REQUIRE(rtol > 0.0 && atol > 0.0, "solver: tolerances must be > 0");
    DLRA_REQUIRE(max_steps >= 1, "solver: max_steps must be >= 1");
  }

  static SolverConfig heun_steps(int n) {
    SolverConfig c;
    c.method = OdeMethod::heun;
    c.substeps = n;
    return c;
  }
  static SolverConfig rk4_steps(int n) {
    SolverConfig c;
    c.method = OdeMethod::rk4;
    c.substeps = n;
    return c;
  }
  static SolverConfig adaptive(double rtol, double atol) {
    SolverConfig c;
    c.method = OdeMethod::embedded45;
    c.rtol = rtol;
    c.atol = atol;
    return c;
  }
};

struct OdeStats {
  long rhs_evals = 0;
  long steps = 0;
  long rejected = 0;
};

namespace detail {

template <typename Mat, typename Rhs>
Mat integrate_heun(Rhs&& f, Mat y, double t0, double t1,
                   const SolverConfig& cfg, OdeStats& stats) {
  const double h = (t1 - t0) / cfg.substeps;
  double t = t0;
  for (int i = 0; i < cfg.substeps; ++i) {
    const Mat k1 = f(t, y);
    const Mat k2 = f(t + h, Mat(y + h * k1));
    y += (h / 2.0) * (k1 + k2);
    stats.rhs_evals += 2;
    ++stats.steps;
    t = t0 + (i + 1) * h;
  }
  return y;
}

template <typename Mat, typename Rhs>
Mat integrate_rk4(Rhs&& f, Mat y, double t0, double t1,
                  const SolverConfig& cfg, OdeStats& stats) {
  const double h = (t1 - t0) / cfg.substeps;
  double t = t0;
  for (int i = 0; i < cfg.substeps; ++i) {
    const Mat k1 = f(t, y);
    const Mat k2 = f(t + h / 2.0, Mat(y + (h / 2.0) * k1));
    const Mat k3 = f(t + h / 2.0, Mat(y + (h / 2.0) * k2));
    const Mat k4 = f(t + h, Mat(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    stats.rhs_evals += 4;
    ++stats.steps;
    t = t0 + (i + 1) * h;
  }
  return y;
}

// Dormand-Prince 5(4), FSAL, Frobenius error norm scaled by
// atol + rtol * max(||y0||, ||y1||).
template <typename Mat, typename Rhs>
Mat integrate_dopri45(Rhs&& f, Mat y, double t0, double t1,
                      const SolverConfig& cfg, OdeStats& stats) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - bhat (embedded 4th order from the same stages)
  constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
  constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
  constexpr double e4 = 125.0 / 192 - 393.0 / 640;
  constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
  constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
  constexpr double e7 = -1.0 / 40;

  const double span = t1 - t0;
  double t = t0;
  double h = span;
  double err_prev = 1.0;
  Mat k1 = f(t, y);
  ++stats.rhs_evals;

  while (t < t1) {
    h = std::min(h, t1 - t);
    const Mat k2 = f(t + a21 * h, Mat(y + h * (a21 * k1)));
    const Mat k3 = f(t + 0.3 * h, Mat(y + h * (a31 * k1 + a32 * k2)));
    const Mat k4 =
        f(t + 0.8 * h, Mat(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Mat k5 = f(t + (8.0 / 9) * h,
                     Mat(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Mat k6 = f(
        t + h,
        Mat(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Mat y1 =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Mat k7 = f(t + h, y1);
    stats.rhs_evals += 6;

    const Mat err_mat = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 +
                             e6 * k6 + e7 * k7);
    const double scale =
        cfg.atol + cfg.rtol * std::max(y.norm(), y1.norm());
    const double err = err_mat.norm() / scale;
    DLRA_CHECK_NUMERIC(std::isfinite(err) && y1.allFinite(),
                       "embedded45: non-finite intermediate value");

    if (err <= 1.0) {
      t += h;
      y = y1;
      k1 = k7;  // FSAL
      ++stats.steps;
      const double grow =
          0.9 * std::pow(std::max(err, 1e-16), -0.7 / 5.0) *
          std::pow(err_prev, 0.4 / 5.0);
      h *= std::clamp(grow, 0.2, 5.0);
      err_prev = std::max(err, 1e-16);
    } else {
      ++stats.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
    if (stats.steps + stats.rejected > cfg.max_steps) {
      throw NumericalError(
          "embedded45: step limit exceeded at t=" + std::to_string(t) +
          " (h=" + std::to_string(h) + ", err=" + std::to_string(err) + ")");
    }
  }
  return y;
}

}  // namespace detail

/// Integrates dY/dt = f(t, Y) from t0 to t1. f is any callable returning a
/// matrix of Y's shape; the result is checked finite.
template <typename Mat, typename Rhs>
Mat integrate(Rhs&& f, Mat y0, double t0, double t1, const SolverConfig& cfg,
              OdeStats* stats = nullptr) {
  cfg.check();
  DLRA_REQUIRE(t1 > t0, "integrate: need t1 > t0");
  DLRA_REQUIRE(y0.allFinite(), "integrate: non-finite initial value");
  OdeStats local;
  OdeStats& s = stats ? *stats : local;
  Mat y;
  switch (cfg.method) {
    case OdeMethod::heun:
      y = detail::integrate_heun(f, std::move(y0), t0, t1, cfg, s);
      break;
    case OdeMethod::rk4:
      y = detail::integrate_rk4(f, std::move(y0), t0, t1, cfg, s);
      break;
    case OdeMethod::embedded45:
      y = detail::integrate_dopri45(f, std::move(y0), t0, t1, cfg, s);
      break;
  }
  DLRA_CHECK_NUMERIC(y.allFinite(), "integrate: non-finite result");
  return y;
}

}  // namespace dlra
