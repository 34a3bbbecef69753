#pragma once

#include <cmath>
#include <span>
#include <string>

#include "glperiod/error.hpp"

namespace glperiod {

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

/// Least-squares line through (log(1+t), log value) for t in [t_lo, t_hi].
/// The slope estimates p in value ~ C (1+t)^p.
inline DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, double t_lo,
                               double t_hi) {
  if (times.size() != values.size()) throw InsufficientData("fit_decay_rate: times and values differ in length");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int n = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(values[i] > 0.0))
      throw InsufficientData("fit_decay_rate: non-positive value " + sci(values[i]) + " at t=" +
                             sci(times[i]));
    const double x = std::log1p(times[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++n;
  }
  if (n < 8) throw InsufficientData("fit_decay_rate needs at least 8 samples in the window (got " +
                                    std::to_string(n) + ")");
  const double mx = sx / n, my = sy / n;
  const double cxx = sxx / n - mx * mx;
  const double cxy = sxy / n - mx * my;
  const double cyy = syy / n - my * my;
  if (!(cxx > 0.0)) throw InsufficientData("fit_decay_rate: window holds a single time");
  DecayFit fit;
  fit.slope = cxy / cxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
  fit.samples = n;
  return fit;
}

}  // namespace glperiod
