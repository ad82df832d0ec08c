#include "sgee/noise.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sgee {

CovarianceSpec CovarianceSpec::power_decay(double r) {
  if (!(r > 0.0)) {
    throw std::domain_error("CovarianceSpec::power_decay: r must be > 0");
  }
  CovarianceSpec c;
  c.kind = Kind::power_decay;
  c.r = r;
  return c;
}

CovarianceSpec CovarianceSpec::custom(std::vector<double> q) {
  for (double x : q) {
    if (!(x >= 0.0)) {
      throw std::domain_error("CovarianceSpec::custom: q_k must be >= 0");
    }
  }
  CovarianceSpec c;
  c.kind = Kind::custom;
  c.custom_q = std::move(q);
  return c;
}

double CovarianceSpec::q(std::size_t k) const {
  if (k < 1) {
    throw std::domain_error("CovarianceSpec::q: mode index must be >= 1");
  }
  switch (kind) {
    case Kind::white:
      return 1.0;
    case Kind::power_decay:
      return std::pow(static_cast<double>(k), -r);
    case Kind::custom:
      return k <= custom_q.size() ? custom_q[k - 1] : 0.0;
  }
  return 0.0;
}

HsConditionReport hs_condition_value(const CovarianceSpec& cov, double beta,
                                     std::size_t n_partial) {
  if (n_partial < 1) {
    throw std::domain_error("hs_condition_value: n_partial must be >= 1");
  }
  HsConditionReport rep;
  double sum = 0.0;
  for (std::size_t k = 1; k <= n_partial; ++k) {
    sum += std::pow(eigenvalue(k), beta - 1.0) * cov.q(k);
  }
  rep.partial_sum = sum;

  // The summand is a_k = (k pi)^{2(beta-1)} q_k.  For the built-in families
  // q_k = k^{-r} the summand is monotone c k^{-p} with p = 2(1-beta)+r, so
  // the integral test bounds the tail by c N^{1-p}/(p-1).
  double p;
  double c;
  switch (cov.kind) {
    case CovarianceSpec::Kind::white:
      p = 2.0 * (1.0 - beta);
      c = std::pow(std::numbers::pi, 2.0 * (beta - 1.0));
      break;
    case CovarianceSpec::Kind::power_decay:
      p = 2.0 * (1.0 - beta) + cov.r;
      c = std::pow(std::numbers::pi, 2.0 * (beta - 1.0));
      break;
    case CovarianceSpec::Kind::custom:
      // Finite support: tail is identically zero past the stored modes.
      rep.tail_bound = 0.0;
      rep.converges = true;
      return rep;
  }
  rep.converges = p > 1.0;
  rep.tail_bound = rep.converges
                       ? c * std::pow(static_cast<double>(n_partial), 1.0 - p) /
                             (p - 1.0)
                       : std::numeric_limits<double>::infinity();
  return rep;
}

namespace {

void check_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::domain_error("noise sampler: increment length must be finite and > 0");
  }
}

}  // namespace

NoiseIncrement sample_bare_increment(const CovarianceSpec& cov, double tau,
                                     std::size_t n, const SeedPath& path) {
  check_tau(tau);
  NoiseIncrement inc;
  inc.dt = tau;
  inc.values = SpectralVector(n);
  std::vector<double> xi(n);
  rng::fill_standard_normals(path, kSlotStepIncrement, xi);
  const double sqrt_tau = std::sqrt(tau);
  for (std::size_t i = 0; i < n; ++i) {
    inc.values[i] = std::sqrt(cov.q(i + 1)) * (sqrt_tau * xi[i]);
  }
  return inc;
}

NoiseIncrement sample_filtered_increment(const CovarianceSpec& cov, double tau,
                                         std::size_t n, const SeedPath& path) {
  NoiseIncrement inc = sample_bare_increment(cov, tau, n, path);
  for (std::size_t i = 0; i < n; ++i) {
    inc.values[i] = std::exp(-eigenvalue(i + 1) * tau) * inc.values[i];
  }
  return inc;
}

std::pair<NoiseIncrement, NoiseIncrement> sample_subinterval_pair(
    const CovarianceSpec& cov, double tau, double s, std::size_t n,
    const SeedPath& path) {
  check_tau(tau);
  if (!(s > 0.0 && s <= tau)) {
    throw std::domain_error("sample_subinterval_pair: s must lie in (0, tau]");
  }
  NoiseIncrement to_s;
  NoiseIncrement rest;
  to_s.dt = s;
  rest.dt = tau - s;
  to_s.values = SpectralVector(n);
  rest.values = SpectralVector(n);

  std::vector<double> xi0(n), xi1(n);
  rng::fill_standard_normals(path, kSlotStepIncrement, xi0);
  rng::fill_standard_normals(path, kSlotBridge, xi1);

  const double sqrt_tau = std::sqrt(tau);
  const double frac = s / tau;
  const double bridge_sd = std::sqrt(s * (tau - s) / tau);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw_full = sqrt_tau * xi0[i];
    const double raw_to_s = frac * raw_full + bridge_sd * xi1[i];
    const double sqrt_q = std::sqrt(cov.q(i + 1));
    to_s.values[i] = sqrt_q * raw_to_s;
    rest.values[i] = sqrt_q * (raw_full - raw_to_s);
  }
  return {std::move(to_s), std::move(rest)};
}

SpectralVector sample_exact_ou_endpoint(const CovarianceSpec& cov, double T,
                                        std::size_t n, const SeedPath& path) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw std::domain_error("sample_exact_ou_endpoint: T must be finite and > 0");
  }
  SpectralVector out(n);
  std::vector<double> xi(n);
  rng::fill_standard_normals(path, kSlotStationary, xi);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eigenvalue(i + 1);
    const double var = cov.q(i + 1) * (-std::expm1(-2.0 * lam * T)) / (2.0 * lam);
    out[i] = std::sqrt(var) * xi[i];
  }
  return out;
}

}  // namespace sgee
