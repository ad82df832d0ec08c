#pragma once

#include <cstddef>
#include <functional>

#include "sgee/exp_euler.hpp"
#include "sgee/kolmogorov.hpp"

namespace sgee {

struct ValueWithError {
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Both sides of the weak-error identity
///   E Phi(Y_M) - E Phi(X(T)) =
///     sum_m int_{t_m}^{t_{m+1}} E< Dmu(T-t, Y~(t)), E(t-t_m) F(Y_m) - F(Y~(t)) > dt
///   + sum_m int_{t_m}^{t_{m+1}} 1/2 E Tr{ D2mu(T-t, Y~(t))
///         (E(t-t_m)B (E(t-t_m)B)^* - B B^*) } dt
/// evaluated per subinterval with Gauss-Legendre quadrature.
struct RepresentationReport {
  ValueWithError lhs;
  ValueWithError drift_term;
  ValueWithError trace_term;
  double residual = 0.0;            // lhs - (drift + trace)
  double quadrature_error = 0.0;    // Richardson estimate (node halving)
  std::size_t quadrature_nodes = 0;
  std::size_t mc_samples = 0;
  double tolerance = 0.0;
  bool pass = false;
};

struct RepresentationOptions {
  std::size_t quadrature_nodes = 8;
  /// 0 keeps everything closed-form (diagonal-linear family only); > 0
  /// evaluates both sides by Monte Carlo over that many paths.
  std::size_t mc_samples = 0;
  SeedPath path;
  double residual_tolerance = 1e-6;  // analytic mode
  double stderr_multiplier = 4.0;    // Monte Carlo mode
};

/// Weak error E Phi(Y_M) - E Phi(X(T)).
///   samples == 0: both expectations in closed form (diagonal-linear drift).
///   samples  > 0, linear family: independent Monte Carlo on both sides.
///   samples  > 0, nonlinear f: coupled coarse/fine self-convergence with
///   the given refinement as the reference.
struct LhsOptions {
  std::size_t samples = 0;
  std::size_t refinement = 64;
};
ValueWithError lhs_weak_error(const SchemeConfig& cfg, const TestFunctional& phi,
                              const LhsOptions& opts, const SeedPath& path);

/// First summand of the identity.  Exactly {0, 0} when f is identically
/// zero.  With mc_samples == 0 the diagonal-linear closed form is used.
ValueWithError rhs_drift_term(const SchemeConfig& cfg, const TestFunctional& phi,
                              std::size_t quadrature_nodes, std::size_t mc_samples,
                              const SeedPath& path);

/// Second (trace) summand; per mode the operator gap is
/// q_k (e^{-2 lambda_k (t - t_m)} - 1).
ValueWithError rhs_trace_term(const SchemeConfig& cfg, const TestFunctional& phi,
                              std::size_t quadrature_nodes, std::size_t mc_samples,
                              const SeedPath& path);

RepresentationReport verify_representation(const SchemeConfig& cfg,
                                           const TestFunctional& phi,
                                           const RepresentationOptions& opts);

/// Gradient oracle for drift terms whose backward function has no closed
/// form: maps (time to go, state) to an estimate of Dmu.
using GradMuFn =
    std::function<SpectralVector(double time_to_go, const SpectralVector& y)>;

/// Closed-form gradient of the diagonal-linear family.
GradMuFn closed_form_grad(const KolmogorovField& field);

/// Finite-difference-over-Monte-Carlo gradient: central differences of
/// coupled path averages started from y +- h e_k, refined integration with
/// the given refinement.  Intended for very small n; the h^2 bias is the
/// caller's to budget.
struct McGradOptions {
  double h = 1e-2;
  std::size_t samples = 2000;
  std::size_t refinement = 16;
};
GradMuFn mc_fd_grad(const SchemeConfig& cfg, const TestFunctional& phi,
                    const McGradOptions& opts, const SeedPath& path);

/// Drift term with an externally supplied gradient oracle (general f).
ValueWithError rhs_drift_term_with_grad(const SchemeConfig& cfg,
                                        const GradMuFn& grad,
                                        std::size_t quadrature_nodes,
                                        std::size_t mc_samples, const SeedPath& path);

/// Trace term with an externally supplied diagonal Hessian-trace oracle:
/// maps (time to go, state, per-mode weights) to
/// sum_k weights_k D2mu[e_k, e_k].
using HessTraceFn = std::function<double(
    double time_to_go, const SpectralVector& y, const std::vector<double>& weights)>;
ValueWithError rhs_trace_term_with_hess(const SchemeConfig& cfg,
                                        const HessTraceFn& hess,
                                        std::size_t quadrature_nodes,
                                        std::size_t mc_samples, const SeedPath& path);

/// Time-changed auxiliary state E(T-t) Y~(t); at t = T it coincides with
/// Y~(T) = Y_M on a coupled path.
inline SpectralVector auxiliary_time_changed(const SpectralVector& y_tilde,
                                             double time_to_go) {
  return apply_semigroup(y_tilde, time_to_go);
}

}  // namespace sgee
