#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dlra/core/common.hpp"

namespace dlra {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
};

/// Least squares on (log h, log err). Needs at least three positive points.
inline SlopeFit fit_slope(std::span<const double> h,
                          std::span<const double> err) {
  DLRA_REQUIRE(h.size() == err.size() && h.size() >= 3,
               "fit_slope: need at least 3 matching points");
  const auto n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    DLRA_REQUIRE(h[i] > 0.0 && err[i] > 0.0,
                 "fit_slope: values must be positive");
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double r =
        std::log(err[i]) - (fit.intercept + fit.slope * std::log(h[i]));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

struct WindowedSlopeFit {
  SlopeFit fit;
  std::size_t first = 0;  // inclusive window into the input arrays
  std::size_t last = 0;
  bool floor_flagged = false;
  double floor_estimate = 0.0;
};

/// Slope fit over the monotone region of an error-vs-h series (h strictly
/// decreasing). Trailing points where the local slope collapses sit on an
/// error floor and are excluded (plus anything within 10x of the detected
/// floor); up to two leading points far off the typical local slope are
/// dropped as saturated.
inline WindowedSlopeFit fit_slope_windowed(std::span<const double> h,
                                           std::span<const double> err) {
  DLRA_REQUIRE(h.size() == err.size() && h.size() >= 3,
               "fit_slope_windowed: need at least 3 points");
  const std::size_t n = h.size();
  std::vector<double> local(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    DLRA_REQUIRE(h[i] > h[i + 1] && h[i + 1] > 0.0,
                 "fit_slope_windowed: h must be strictly decreasing");
    DLRA_REQUIRE(err[i] > 0.0 && err[i + 1] > 0.0,
                 "fit_slope_windowed: errors must be positive");
    local[i] = std::log(err[i + 1] / err[i]) / std::log(h[i + 1] / h[i]);
  }
  std::vector<double> sorted = local;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];

  WindowedSlopeFit out;
  out.first = 0;
  out.last = n - 1;

  // saturated leading points
  for (int drops = 0; drops < 2; ++drops) {
    if (out.last - out.first + 1 <= 3) break;
    if (std::abs(local[out.first] - median) > 0.75) ++out.first;
    else break;
  }

  // floor: local slope collapses towards zero at the small-h end
  while (out.last - out.first + 1 > 3 && local[out.last - 1] < 0.5 * median) {
    out.last -= 1;
    out.floor_flagged = true;
  }
  if (out.floor_flagged) {
    out.floor_estimate = *std::min_element(err.begin(), err.end());
    while (out.last - out.first + 1 > 3 &&
           err[out.last] <= 10.0 * out.floor_estimate)
      out.last -= 1;
  }

  const std::size_t count = out.last - out.first + 1;
  out.fit = fit_slope(h.subspan(out.first, count), err.subspan(out.first, count));
  return out;
}

}  // namespace dlra
