#include "sgee/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgee {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInverseExpCap = 700.0;
}  // namespace

SpectralVector SpectralVector::basis(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) {
    throw std::domain_error("SpectralVector::basis: mode index out of range");
  }
  SpectralVector v(n);
  v.coeffs[k - 1] = 1.0;
  return v;
}

bool SpectralVector::all_finite() const {
  return std::all_of(coeffs.begin(), coeffs.end(),
                     [](double x) { return std::isfinite(x); });
}

bool operator==(const SpectralVector& a, const SpectralVector& b) {
  return a.coeffs == b.coeffs;
}

double eigenvalue(std::size_t k) {
  if (k < 1) {
    throw std::domain_error("eigenvalue: mode index must be >= 1");
  }
  const double kpi = static_cast<double>(k) * kPi;
  return kpi * kpi;
}

void require_finite(const SpectralVector& v, const char* what) {
  if (!v.all_finite()) {
    throw std::domain_error(std::string(what) + ": non-finite coefficient");
  }
}

SpectralVector apply_semigroup(const SpectralVector& v, double t) {
  require_finite(v, "apply_semigroup");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error("apply_semigroup: time must be finite and >= 0");
  }
  SpectralVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = std::exp(-eigenvalue(i + 1) * t) * v[i];
  }
  return out;
}

SpectralVector apply_semigroup_inverse(const SpectralVector& v, double t) {
  require_finite(v, "apply_semigroup_inverse");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error("apply_semigroup_inverse: time must be finite and >= 0");
  }
  const std::size_t n = v.dim();
  if (n > 0 && eigenvalue(n) * t > kInverseExpCap) {
    throw std::range_error(
        "apply_semigroup_inverse: lambda_n * t exceeds the exp overflow domain");
  }
  SpectralVector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(eigenvalue(i + 1) * t) * v[i];
  }
  return out;
}

SpectralVector apply_fractional_power(const SpectralVector& v, double gamma) {
  require_finite(v, "apply_fractional_power");
  if (!std::isfinite(gamma)) {
    throw std::domain_error("apply_fractional_power: exponent must be finite");
  }
  SpectralVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    out[i] = std::pow(eigenvalue(i + 1), gamma) * v[i];
  }
  return out;
}

double sobolev_norm(const SpectralVector& v, double gamma) {
  require_finite(v, "sobolev_norm");
  double sum = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    sum += std::pow(eigenvalue(i + 1), gamma) * v[i] * v[i];
  }
  return std::sqrt(sum);
}

double l2_norm(const SpectralVector& v) {
  double sum = 0.0;
  for (double x : v.coeffs) sum += x * x;
  return std::sqrt(sum);
}

SpectralVector project(const SpectralVector& v, std::size_t m) {
  if (m < 1) {
    throw std::domain_error("project: target dimension must be >= 1");
  }
  SpectralVector out(m);
  const std::size_t keep = std::min(m, v.dim());
  std::copy(v.coeffs.begin(), v.coeffs.begin() + keep, out.coeffs.begin());
  return out;
}

SmoothingBoundReport smoothing_bound_check(double gamma, double t) {
  if (!(t > 0.0)) {
    throw std::domain_error("smoothing_bound_check: t must be > 0");
  }
  if (!(gamma >= 0.0)) {
    throw std::domain_error("smoothing_bound_check: gamma must be >= 0");
  }
  SmoothingBoundReport rep;
  rep.gamma = gamma;
  rep.t = t;
  // lambda^gamma exp(-lambda t) is unimodal in lambda with maximiser
  // lambda* = gamma / t, so only modes adjacent to sqrt(lambda*)/pi compete.
  const double lambda_star = gamma / t;
  const std::size_t k_star =
      static_cast<std::size_t>(std::floor(std::sqrt(lambda_star) / kPi));
  double best = 0.0;
  std::size_t best_k = 1;
  for (std::size_t k = (k_star > 1 ? k_star - 1 : 1); k <= k_star + 2; ++k) {
    const double lam = eigenvalue(k);
    const double val = std::pow(lam, gamma) * std::exp(-lam * t);
    if (val > best) {
      best = val;
      best_k = k;
    }
  }
  rep.operator_norm = best;
  rep.argmax_mode = best_k;
  rep.ratio = best * std::pow(t, gamma);
  rep.ratio_bound = (gamma == 0.0)
                        ? 1.0
                        : std::pow(gamma / std::numbers::e, gamma);
  return rep;
}

}  // namespace sgee
