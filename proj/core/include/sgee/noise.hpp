#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sgee/rng.hpp"
#include "sgee/spectral.hpp"

namespace sgee {

/// Covariance operator Q of the driving Wiener process, diagonal in the
/// sine eigenbasis: Q e_k = q_k e_k.  B = Q^{1/2} scales mode k by
/// sqrt(q_k).
struct CovarianceSpec {
  enum class Kind { white, power_decay, custom };

  Kind kind = Kind::white;
  double r = 0.0;                 // decay exponent for power_decay
  std::vector<double> custom_q;   // per-mode eigenvalues for custom

  static CovarianceSpec white() { return {}; }
  static CovarianceSpec power_decay(double r);
  static CovarianceSpec custom(std::vector<double> q);

  /// Eigenvalue q_k of Q against e_k (1-based k).
  double q(std::size_t k) const;
};

/// One vector of Gaussian mode increments over an interval of length dt.
/// Depending on the producing sampler the entries are either the bare
/// (Q^{1/2}-scaled) Brownian increments or the semigroup-filtered ones; the
/// consuming scheme operation states which convention it expects.
struct NoiseIncrement {
  SpectralVector values;
  double dt = 0.0;
};

/// Value of the weighted Hilbert-Schmidt sum
///   sum_k lambda_k^{beta-1} q_k
/// truncated at n_partial, plus an integral-test bound on the remaining
/// tail and a convergence verdict from the exponent test.
struct HsConditionReport {
  double partial_sum = 0.0;
  double tail_bound = 0.0;
  bool converges = false;
};
HsConditionReport hs_condition_value(const CovarianceSpec& cov, double beta,
                                     std::size_t n_partial);

/// Draw slots reserved by the library.  Slot 0 carries the per-step
/// Brownian increment of a scheme path, slot 1 the interior bridge
/// refinement of the same step, slot 2 one-shot stationary-law draws.
enum : std::uint32_t {
  kSlotStepIncrement = 0,
  kSlotBridge = 1,
  kSlotStationary = 2,
};

/// Semigroup-filtered step increment: mode k is distributed as
/// Normal(0, tau exp(-2 lambda_k tau) q_k), exactly the law of
/// int_{t_m}^{t_m+tau} E(tau) B dW.  Deterministic in (path, n).
NoiseIncrement sample_filtered_increment(const CovarianceSpec& cov, double tau,
                                         std::size_t n, const SeedPath& path);

/// Bare step increment B (W(t_m+tau) - W(t_m)) for the same Brownian path
/// as sample_filtered_increment: filtered = exp(-lambda tau) * bare, mode
/// by mode, bit for bit.
NoiseIncrement sample_bare_increment(const CovarianceSpec& cov, double tau,
                                     std::size_t n, const SeedPath& path);

/// Splits the step increment at interior time s in (0, tau]: returns the
/// bare increments B(W(t_m+s)-W(t_m)) and B(W(t_m+tau)-W(t_m+s)).  The two
/// halves are independent Gaussians with per-mode variances s q_k and
/// (tau-s) q_k, and their sum reproduces sample_bare_increment of the same
/// path exactly, so a scheme path and its continuous extension share one
/// Brownian path.  (Conditionally on the full increment the split is the
/// standard Brownian bridge.)
std::pair<NoiseIncrement, NoiseIncrement> sample_subinterval_pair(
    const CovarianceSpec& cov, double tau, double s, std::size_t n,
    const SeedPath& path);

/// Exact draw of the stochastic convolution int_0^T E(T-u) B dW(u) for the
/// drift-free equation: mode k ~ Normal(0, q_k (1-exp(-2 lambda_k T)) / (2 lambda_k)).
SpectralVector sample_exact_ou_endpoint(const CovarianceSpec& cov, double T,
                                        std::size_t n, const SeedPath& path);

}  // namespace sgee
