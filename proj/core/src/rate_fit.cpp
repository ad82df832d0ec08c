#include "sgee/rate_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace sgee {

RateFit fit_rate(const std::vector<RatePoint>& points, double noise_floor_mult) {
  std::vector<RatePoint> usable;
  bool any_stderr = false;
  for (const RatePoint& p : points) {
    if (!(p.error > 0.0)) continue;
    if (p.stderr_ > 0.0 && std::fabs(p.error) < noise_floor_mult * p.stderr_) continue;
    usable.push_back(p);
    if (p.stderr_ > 0.0) any_stderr = true;
  }
  if (usable.size() < 3) {
    throw std::invalid_argument(
        "fit_rate: need at least 3 usable points above the noise floor");
  }

  // Weighted least squares on (log h, log e); delta method gives
  // sigma_log = stderr / error.
  double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
  for (const RatePoint& p : usable) {
    const double x = std::log(p.h);
    const double y = std::log(p.error);
    double w = 1.0;
    if (any_stderr && p.stderr_ > 0.0) {
      const double sigma_log = p.stderr_ / p.error;
      w = 1.0 / (sigma_log * sigma_log);
    }
    sw += w;
    swx += w * x;
    swy += w * y;
    swxx += w * x * x;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) {
    throw std::invalid_argument("fit_rate: degenerate abscissae");
  }
  RateFit fit;
  fit.points = usable;
  fit.used = usable.size();
  fit.slope = (sw * swxy - swx * swy) / det;
  fit.intercept = (swxx * swy - swx * swxy) / det;

  // Plain R^2 on the log data.
  double ybar = 0.0;
  for (const RatePoint& p : usable) ybar += std::log(p.error);
  ybar /= static_cast<double>(usable.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const RatePoint& p : usable) {
    const double x = std::log(p.h);
    const double y = std::log(p.error);
    const double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
    ss_tot += (y - ybar) * (y - ybar);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  // Slope variance: from the stated weights when available, otherwise from
  // the residual scatter (classic OLS).
  double var_slope;
  if (any_stderr) {
    var_slope = sw / det;
  } else {
    const double dof = static_cast<double>(usable.size()) - 2.0;
    const double s2 = dof > 0.0 ? ss_res / dof : 0.0;
    var_slope = s2 * sw / det;
  }
  const double half_width = 1.959963984540054 * std::sqrt(var_slope);
  fit.slope_ci_lo = fit.slope - half_width;
  fit.slope_ci_hi = fit.slope + half_width;
  return fit;
}

}  // namespace sgee
