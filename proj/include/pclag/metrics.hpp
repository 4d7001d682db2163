#pragma once

#include "pclag/types.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pclag {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MetricsRow {
  long k = 0;
  double objective = 0.0;
  double gap_fixed = 0.0;
  double gap_ball = 0.0;
  double feasibility = 0.0;
  double residue = 0.0;
  double min_residue = 0.0;
  double ergodic_gap = 0.0;
  long long wall_time_ns = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double k_lo = 0.0, k_hi = 0.0;
  long points = 0;
  long clipped = 0;  // nonpositive values raised to 1e-16
};

/// Least-squares line through (log k, log value) over the last `window_fraction` of the
/// key range, restricted to k ≥ k_min. Keys are the iteration counts (positive).
template <class Series>
RateFit fit_rate(const Series& series, double window_fraction = 0.8, double k_min = 50.0,
                 long min_points = 20) {
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw InputError("fit_rate: window fraction must be in (0,1]");
  if (std::begin(series) == std::end(series)) throw InsufficientData("fit_rate: empty series");
  double k_max = 0.0;
  for (const auto& [k, v] : series) k_max = std::max(k_max, static_cast<double>(k));
  const double lo = std::max(k_min, (1.0 - window_fraction) * k_max);

  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  fit.k_lo = k_max;
  for (const auto& [kk, vv] : series) {
    const double k = static_cast<double>(kk);
    if (k < lo || k <= 0.0) continue;
    double v = static_cast<double>(vv);
    if (!(v > 0.0)) {
      v = 1e-16;
      ++fit.clipped;
    }
    const double x = std::log(k), y = std::log(v);
    sx += x, sy += y, sxx += x * x, sxy += x * y, syy += y * y;
    ++fit.points;
    fit.k_lo = std::min(fit.k_lo, k);
    fit.k_hi = std::max(fit.k_hi, k);
  }
  if (fit.points < min_points)
    throw InsufficientData("fit_rate: " + std::to_string(fit.points) + " points in window, need " +
                           std::to_string(min_points));
  const double n = static_cast<double>(fit.points);
  const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n, cyy = syy - sy * sy / n;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = cyy > 0.0 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
  return fit;
}

/// Series of one metrics column keyed by iteration count k+1 (x̆^k is the (k+1)-th iterate).
template <class Getter>
std::vector<std::pair<long, double>> metric_series(const std::vector<MetricsRow>& rows, Getter get) {
  std::vector<std::pair<long, double>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r.k + 1, get(r));
  return out;
}

}  // namespace pclag
