#pragma once

#include <cstddef>
#include <vector>

namespace sgee {

/// Element of H_n expanded in the Dirichlet sine basis on (0,1),
/// e_k(x) = sqrt(2) sin(k pi x).  coeffs[i] multiplies e_{i+1}; dim() is the
/// truncation level n.  All entries are required to be finite.
struct SpectralVector {
  std::vector<double> coeffs;

  SpectralVector() = default;
  explicit SpectralVector(std::size_t n) : coeffs(n, 0.0) {}
  explicit SpectralVector(std::vector<double> c) : coeffs(std::move(c)) {}

  std::size_t dim() const { return coeffs.size(); }
  double& operator[](std::size_t i) { return coeffs[i]; }
  double operator[](std::size_t i) const { return coeffs[i]; }

  double* data() { return coeffs.data(); }
  const double* data() const { return coeffs.data(); }

  /// Unit basis vector e_k (1-based mode index) in dimension n.
  static SpectralVector basis(std::size_t k, std::size_t n);

  bool all_finite() const;
};

bool operator==(const SpectralVector& a, const SpectralVector& b);

/// Dirichlet Laplacian eigenvalue on (0,1): lambda_k = (k pi)^2, k >= 1.
double eigenvalue(std::size_t k);

/// Throws std::domain_error if v contains NaN or Inf.
void require_finite(const SpectralVector& v, const char* what);

/// Heat semigroup E(t): mode k is scaled by exp(-lambda_k t).  Requires
/// t >= 0 and finite input.
SpectralVector apply_semigroup(const SpectralVector& v, double t);

/// Inverse semigroup E(-t): mode k scaled by exp(+lambda_k t).  Only
/// defined on explicit finite-dimensional vectors and only while
/// lambda_n * t <= 700 (binary64 exponent range); beyond that a
/// std::range_error is raised instead of returning Inf.
SpectralVector apply_semigroup_inverse(const SpectralVector& v, double t);

/// Fractional power (-A)^gamma: mode k scaled by lambda_k^gamma.
SpectralVector apply_fractional_power(const SpectralVector& v, double gamma);

/// Fractional Sobolev norm (sum_k lambda_k^gamma v_k^2)^{1/2}.
/// gamma = 0 is the L2 (Euclidean coefficient) norm.
double sobolev_norm(const SpectralVector& v, double gamma);

double l2_norm(const SpectralVector& v);

/// Projection P_m: keeps modes 1..min(m, dim), re-sizing the vector to m
/// (zero-padding when m exceeds the current dimension).
SpectralVector project(const SpectralVector& v, std::size_t m);

/// Exact operator norm of (-A)^gamma E(t) on the full space together with
/// its ratio to t^{-gamma}.  The supremum over modes is attained near
/// lambda ~ gamma/t and the ratio is uniformly bounded by (gamma/e)^gamma.
struct SmoothingBoundReport {
  double gamma = 0.0;
  double t = 0.0;
  double operator_norm = 0.0;   // sup_k lambda_k^gamma exp(-lambda_k t)
  double ratio = 0.0;           // operator_norm * t^gamma
  double ratio_bound = 0.0;     // (gamma/e)^gamma, = 1 at gamma = 0
  std::size_t argmax_mode = 0;
};
SmoothingBoundReport smoothing_bound_check(double gamma, double t);

}  // namespace sgee
