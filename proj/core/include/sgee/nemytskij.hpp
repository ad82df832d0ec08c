#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sgee/rng.hpp"
#include "sgee/spectral.hpp"

namespace sgee {

/// Claimed regularity exponents of a nonlinearity (see check_nonlinearity).
struct RegularityExponents {
  double beta = 0.5;    // noise-regularity exponent the pairing targets
  double eta = 0.3;     // second-derivative smoothing exponent, [0,1)
  double delta = 1.0;   // first-derivative dual-норм exponent, [1,2)
};

/// Pointwise nonlinearity f(xi, z) with its partial derivatives.
///
/// The built-in catalog entries carry closed-form derivative bounds
/// (lipschitz) and regularity exponents; kernels for them run vectorised.
/// User-supplied scalar callables are also accepted (kind == custom).
struct NemytskijSpec {
  enum class Kind { zero, diag_linear, sine, rational, sine_forced, custom };

  Kind kind = Kind::zero;
  std::string name = "zero";
  double scale = 0.0;  // a in a*z, a*sin(z), ...

  std::function<double(double, double)> f;
  std::function<double(double, double)> df_dz;
  std::function<double(double, double)> d2f_dz2;
  std::function<double(double, double)> d2f_dxidz;

  double lipschitz = 0.0;
  RegularityExponents exponents;

  bool is_zero() const { return kind == Kind::zero || (kind == Kind::diag_linear && scale == 0.0); }
  bool is_diag_linear() const { return kind == Kind::zero || kind == Kind::diag_linear; }
  /// Drift rate a of the diagonal-linear family (f = a z); 0 for zero f.
  double linear_rate() const { return kind == Kind::diag_linear ? scale : 0.0; }
};

namespace nonlinearity {
NemytskijSpec zero();
NemytskijSpec diag_linear(double a);            // f(xi,z) = a z
NemytskijSpec sine(double a = 1.0);             // f(xi,z) = a sin(z)
NemytskijSpec rational(double a = 1.0);         // f(xi,z) = a z/(1+z^2)
NemytskijSpec sine_forced(double a = 1.0);      // f(xi,z) = a sin(z) + sin(pi xi)
NemytskijSpec custom(std::string name,
                     std::function<double(double, double)> f,
                     std::function<double(double, double)> df_dz,
                     std::function<double(double, double)> d2f_dz2,
                     std::function<double(double, double)> d2f_dxidz,
                     double lipschitz, RegularityExponents exponents);
/// Catalog lookup by config name ("zero", "linear", "sin", "rational",
/// "sin_forced").
NemytskijSpec by_name(const std::string& name, double scale);
}  // namespace nonlinearity

/// Interior collocation nodes xi_j = j/(m+1), j = 1..m, with cached sine
/// transform plans.  m defaults to the smallest 3-smooth-plus-one size with
/// m >= 2n+1 (dealias factor 2; see to_spectral).
class CollocationGrid {
 public:
  explicit CollocationGrid(std::size_t n, std::size_t m_points = 0);
  ~CollocationGrid();
  CollocationGrid(const CollocationGrid&) = delete;
  CollocationGrid& operator=(const CollocationGrid&) = delete;
  CollocationGrid(CollocationGrid&&) noexcept;
  CollocationGrid& operator=(CollocationGrid&&) noexcept;

  std::size_t modes() const { return n_; }
  std::size_t points() const { return m_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Unnormalised DST-I of length points(): out_k = 2 sum_j in_j sin(pi j k/(m+1)).
  /// in and out must be distinct buffers of length points(); safe to call
  /// concurrently with distinct buffers.
  void dst(const double* in, double* out) const;

  static std::size_t default_points(std::size_t n);

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> nodes_;
  struct PlanHandle;
  std::unique_ptr<PlanHandle> plan_;
};

/// Synthesis u(xi_j) = sum_k v_k sqrt(2) sin(k pi xi_j) at the grid nodes
/// (exact for band-limited v since points() >= modes()).
std::vector<double> to_physical(const SpectralVector& v, const CollocationGrid& grid);

/// Analysis v_k = sqrt(2)/(m+1) sum_j values_j sin(k pi xi_j), truncated to
/// n modes; exact inverse of to_physical on band-limited data.
SpectralVector to_spectral(std::span<const double> values,
                           const CollocationGrid& grid, std::size_t n);

/// P_n F(u): pseudo-spectral evaluation of the composition operator
/// u |-> f(xi, u(xi)) projected back onto the first n modes.  The grid
/// oversampling (m >= 2n) keeps the quadratic part of f alias-free; the
/// residual aliasing of a general f is reported by aliasing_residual.
SpectralVector evaluate_F(const NemytskijSpec& spec, const SpectralVector& v,
                          const CollocationGrid& grid);

/// P_n [ df/dz(xi, u) w ]: the Frechet derivative of evaluate_F at v in
/// direction w.
SpectralVector evaluate_F_prime(const NemytskijSpec& spec, const SpectralVector& v,
                                const SpectralVector& w, const CollocationGrid& grid);

/// P_n [ d2f/dz2(xi, u) w1 w2 ]: second derivative, symmetric in (w1, w2).
SpectralVector evaluate_F_second(const NemytskijSpec& spec, const SpectralVector& v,
                                 const SpectralVector& w1, const SpectralVector& w2,
                                 const CollocationGrid& grid);

/// Energy difference between evaluate_F on `grid` and on a finer control
/// grid; measures the aliasing the working grid leaves behind.
double aliasing_residual(const NemytskijSpec& spec, const SpectralVector& v,
                         const CollocationGrid& grid);

/// Empirical spot-check of the nonlinearity growth/derivative conditions
/// over random probes in H_n:
///   r_growth  : ||F(phi)|| / (||phi|| + 1)
///   r_first   : ||F'(phi) psi|| / ||psi||
///   r_second  : ||(-A)^{-eta} F''(phi)(psi1,psi2)|| / (||psi1|| ||psi2||)
///   r_dual    : ||(-A)^{-delta/2} F'(phi) psi|| / ((1+||phi||_1) ||psi||_{-1})
struct NonlinearityCheckReport {
  double max_growth = 0.0;
  double max_first = 0.0;
  double max_second = 0.0;
  double max_dual = 0.0;
  std::size_t samples = 0;
  double bound = 0.0;
  bool within_bound = true;
};
NonlinearityCheckReport check_nonlinearity(const NemytskijSpec& spec, std::size_t n,
                                           const CollocationGrid& grid,
                                           std::size_t samples, const SeedPath& path,
                                           double bound = 0.0);

}  // namespace sgee
