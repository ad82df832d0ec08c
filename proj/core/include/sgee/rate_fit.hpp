#pragma once

#include <cstddef>
#include <vector>

namespace sgee {

struct RatePoint {
  double h = 0.0;       // step size, eigenvalue, or other abscissa
  double error = 0.0;   // must be > 0 to enter the fit
  double stderr_ = 0.0; // 0 for deterministic evaluations
  std::size_t samples = 0;
};

/// Weighted least-squares fit of log(error) against log(h).
///   slope_ci  : 95% interval from the fit covariance
///   r_squared : ordinary R^2 on the log-log data
///   used      : points that survived the positivity and noise-floor guards
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
  double r_squared = 0.0;
  std::size_t used = 0;
  std::vector<RatePoint> points;
};

/// Fits the usable points of `points`.  A point is usable when error > 0
/// and |error| >= noise_floor_mult * stderr (the guard keeps Monte Carlo
/// noise from masquerading as convergence).  Weights are 1/sigma_log^2 with
/// sigma_log = stderr/error where stderr > 0, uniform otherwise.  Throws
/// std::invalid_argument when fewer than 3 usable points remain.
RateFit fit_rate(const std::vector<RatePoint>& points,
                 double noise_floor_mult = 4.0);

}  // namespace sgee
