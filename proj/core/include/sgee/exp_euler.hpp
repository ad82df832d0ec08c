#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sgee/kolmogorov.hpp"
#include "sgee/nemytskij.hpp"
#include "sgee/noise.hpp"
#include "sgee/rng.hpp"
#include "sgee/spectral.hpp"

namespace sgee {

/// One time-stepping problem: truncation level, uniform mesh, covariance,
/// nonlinearity and deterministic initial datum.
struct SchemeConfig {
  std::size_t n = 0;
  double tau = 0.0;
  std::size_t steps = 0;  // M, tau * M == T
  double T = 0.0;
  CovarianceSpec cov;
  NemytskijSpec f;
  SpectralVector x0;

  void validate() const;

  /// tau = T / M.
  static SchemeConfig uniform(std::size_t n, double T, std::size_t M,
                              CovarianceSpec cov, NemytskijSpec f,
                              SpectralVector x0);
};

/// Initial datum with coefficients scale * k^{-p}; p = 2.5 keeps it well
/// inside H^2.
SpectralVector power_law_initial(std::size_t n, double p = 2.5, double scale = 1.0);

struct SchemePath {
  std::vector<SpectralVector> states;  // Y_0 .. Y_M
  SeedPath seed_path;
};

/// Raised when a path leaves the admissible range (any |mode| > 1e12),
/// carrying the step at which it happened.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// One scheme step
///   Y_{m+1} = E(tau) (Y_m + tau F(Y_m)) + filtered_increment,
/// where the increment must come from sample_filtered_increment (it already
/// carries the E(tau)B filtering; the two placements agree in law and, with
/// this library's samplers, bit for bit).
SpectralVector step(const SchemeConfig& cfg, const SpectralVector& y,
                    const NoiseIncrement& filtered_increment,
                    const CollocationGrid& grid);

/// Interior extension of the step started at Y_m:
///   Y~(t_m + s) = E(s) (Y_m + s F(Y_m)) + E(s) bare_to_s,  0 < s <= tau,
/// with bare_to_s the first half of sample_subinterval_pair for the step's
/// SeedPath.  At s = tau this reproduces the next scheme state exactly.
SpectralVector continuous_extension(const SchemeConfig& cfg, const SpectralVector& y_m,
                                    double s, const NoiseIncrement& bare_to_s,
                                    const CollocationGrid& grid);

/// Full path; states[m] is deterministic in (cfg, path).  Step m consumes
/// counter value path.counter + m.
SchemePath integrate(const SchemeConfig& cfg, const SeedPath& path);

/// Endpoint-only variant (no per-step state storage).
SpectralVector integrate_endpoint(const SchemeConfig& cfg, const SeedPath& path);

/// Endpoint of the refined path with step tau/refinement on the same
/// Brownian path (fine step j of coarse step m consumes counter
/// m*refinement + j).
SpectralVector integrate_reference(const SchemeConfig& cfg, std::size_t refinement,
                                   const SeedPath& path);

/// Coarse and fine endpoints driven by one Brownian path: the coarse
/// increments are re-derived as sums of the fine bare increments, so
/// refinement = 1 reproduces integrate exactly.
struct CoupledEndpoints {
  SpectralVector coarse;
  SpectralVector fine;
};
CoupledEndpoints integrate_coupled_pair(const SchemeConfig& cfg,
                                        std::size_t refinement,
                                        const SeedPath& path);

/// Exact draw of the mild-solution endpoint for the diagonal-linear family
/// (f zero or a*z with a < lambda_1): mode k has mean e^{(a-lambda_k)T} x0_k
/// and variance q_k (1-e^{-2(lambda_k-a)T})/(2(lambda_k-a)).
SpectralVector exact_linear_endpoint(const SchemeConfig& cfg, const SeedPath& path);

/// Closed-form Gaussian law of Y_m for the diagonal-linear family: with
/// rho_k = e^{-lambda_k tau} (1 + a tau),
///   mean_k = rho_k^m x0_k,
///   var_k  = tau q_k e^{-2 lambda_k tau} (1 - rho_k^{2m}) / (1 - rho_k^2).
GaussianState scheme_state_law(const SchemeConfig& cfg, std::size_t m);
GaussianState scheme_endpoint_law(const SchemeConfig& cfg);

/// Reusable integrator bound to one config: holds the collocation grid,
/// decay tables and scratch buffers.  Not safe for concurrent use; create
/// one per worker.
class ExpEulerEngine {
 public:
  explicit ExpEulerEngine(SchemeConfig cfg);
  ~ExpEulerEngine();
  ExpEulerEngine(ExpEulerEngine&&) noexcept;

  const SchemeConfig& config() const { return cfg_; }

  /// Endpoint of the path driven by `path`; out must have size n.
  void run(const SeedPath& path, std::vector<double>& out);

  /// Coupled coarse/fine endpoints (see integrate_coupled_pair).
  void run_coupled(const SeedPath& path, std::size_t refinement,
                   std::vector<double>& coarse, std::vector<double>& fine);

 private:
  struct Impl;
  SchemeConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sgee
