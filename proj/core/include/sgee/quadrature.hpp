#pragma once

#include <cstddef>
#include <vector>

namespace sgee {

/// Gauss-Legendre rule on [-1, 1], computed by Newton iteration on the
/// Legendre recurrence (nodes to machine precision).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t order);

  /// Integrate f over [a, b].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      sum += weights[i] * f(mid + half * nodes[i]);
    }
    return half * sum;
  }
};

}  // namespace sgee
