#include "sgee/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgee {

GaussLegendre::GaussLegendre(std::size_t order) {
  if (order < 1) {
    throw std::domain_error("GaussLegendre: order must be >= 1");
  }
  nodes.resize(order);
  weights.resize(order);
  const std::size_t half = (order + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(order) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (order == 1) {
        p1 = x;
      }
      for (std::size_t k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double p = (order == 1) ? x : p1;
      const double pm1 = (order == 1) ? 1.0 : p0;
      dp = order * (x * p - pm1) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[order - 1 - i] = w;
  }
}

}  // namespace sgee
