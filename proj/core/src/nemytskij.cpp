#include "sgee/nemytskij.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "nemytskij_internal.hpp"

namespace sgee {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool smooth_2_3(std::size_t x) {
  while (x % 2 == 0) x /= 2;
  while (x % 3 == 0) x /= 3;
  return x == 1;
}

}  // namespace

namespace nonlinearity {

NemytskijSpec zero() {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::zero;
  s.name = "zero";
  s.f = [](double, double) { return 0.0; };
  s.df_dz = s.f;
  s.d2f_dz2 = s.f;
  s.d2f_dxidz = s.f;
  s.lipschitz = 0.0;
  s.exponents = {1.0, 0.0, 1.0};
  return s;
}

NemytskijSpec diag_linear(double a) {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::diag_linear;
  s.name = "linear";
  s.scale = a;
  s.f = [a](double, double z) { return a * z; };
  s.df_dz = [a](double, double) { return a; };
  s.d2f_dz2 = [](double, double) { return 0.0; };
  s.d2f_dxidz = [](double, double) { return 0.0; };
  s.lipschitz = std::fabs(a);
  s.exponents = {1.0, 0.0, 1.0};
  return s;
}

NemytskijSpec sine(double a) {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::sine;
  s.name = "sin";
  s.scale = a;
  s.f = [a](double, double z) { return a * std::sin(z); };
  s.df_dz = [a](double, double z) { return a * std::cos(z); };
  s.d2f_dz2 = [a](double, double z) { return -a * std::sin(z); };
  s.d2f_dxidz = [](double, double) { return 0.0; };
  s.lipschitz = std::fabs(a);
  s.exponents = {0.5, 0.3, 1.0};
  return s;
}

NemytskijSpec rational(double a) {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::rational;
  s.name = "rational";
  s.scale = a;
  s.f = [a](double, double z) { return a * z / (1.0 + z * z); };
  s.df_dz = [a](double, double z) {
    const double d = 1.0 + z * z;
    return a * (1.0 - z * z) / (d * d);
  };
  s.d2f_dz2 = [a](double, double z) {
    const double d = 1.0 + z * z;
    return a * 2.0 * z * (z * z - 3.0) / (d * d * d);
  };
  s.d2f_dxidz = [](double, double) { return 0.0; };
  s.lipschitz = std::fabs(a);
  s.exponents = {0.5, 0.3, 1.0};
  return s;
}

NemytskijSpec sine_forced(double a) {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::sine_forced;
  s.name = "sin_forced";
  s.scale = a;
  s.f = [a](double xi, double z) { return a * std::sin(z) + std::sin(kPi * xi); };
  s.df_dz = [a](double, double z) { return a * std::cos(z); };
  s.d2f_dz2 = [a](double, double z) { return -a * std::sin(z); };
  s.d2f_dxidz = [](double, double) { return 0.0; };
  s.lipschitz = std::max(std::fabs(a), 1.0);
  s.exponents = {0.5, 0.3, 1.0};
  return s;
}

NemytskijSpec custom(std::string name, std::function<double(double, double)> f,
                     std::function<double(double, double)> df_dz,
                     std::function<double(double, double)> d2f_dz2,
                     std::function<double(double, double)> d2f_dxidz,
                     double lipschitz, RegularityExponents exponents) {
  NemytskijSpec s;
  s.kind = NemytskijSpec::Kind::custom;
  s.name = std::move(name);
  s.f = std::move(f);
  s.df_dz = std::move(df_dz);
  s.d2f_dz2 = std::move(d2f_dz2);
  s.d2f_dxidz = std::move(d2f_dxidz);
  s.lipschitz = lipschitz;
  s.exponents = exponents;
  return s;
}

NemytskijSpec by_name(const std::string& name, double scale) {
  if (name == "zero") return zero();
  if (name == "linear") return diag_linear(scale);
  if (name == "sin") return sine(scale);
  if (name == "rational") return rational(scale);
  if (name == "sin_forced") return sine_forced(scale);
  throw std::invalid_argument("unknown nonlinearity name: " + name);
}

}  // namespace nonlinearity

struct CollocationGrid::PlanHandle {
  fftw_plan plan = nullptr;
  ~PlanHandle() {
    if (plan != nullptr) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

std::size_t CollocationGrid::default_points(std::size_t n) {
  std::size_t mp1 = 2 * n + 2;  // m >= 2n+1
  while (!smooth_2_3(mp1)) ++mp1;
  return mp1 - 1;
}

CollocationGrid::CollocationGrid(std::size_t n, std::size_t m_points)
    : n_(n), m_(m_points == 0 ? default_points(n) : m_points) {
  if (n_ < 1) {
    throw std::domain_error("CollocationGrid: need at least one mode");
  }
  if (m_ < n_) {
    throw std::domain_error("CollocationGrid: grid must resolve every mode (m >= n)");
  }
  nodes_.resize(m_);
  for (std::size_t j = 0; j < m_; ++j) {
    nodes_[j] = static_cast<double>(j + 1) / static_cast<double>(m_ + 1);
  }
  plan_ = std::make_unique<PlanHandle>();
  std::vector<double> a(m_), b(m_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_->plan = fftw_plan_r2r_1d(static_cast<int>(m_), a.data(), b.data(),
                                 FFTW_RODFT00, FFTW_MEASURE | FFTW_UNALIGNED);
  if (plan_->plan == nullptr) {
    throw std::runtime_error("CollocationGrid: sine transform plan failed");
  }
}

CollocationGrid::~CollocationGrid() = default;
CollocationGrid::CollocationGrid(CollocationGrid&&) noexcept = default;
CollocationGrid& CollocationGrid::operator=(CollocationGrid&&) noexcept = default;

void CollocationGrid::dst(const double* in, double* out) const {
  fftw_execute_r2r(plan_->plan, const_cast<double*>(in), out);
}

std::vector<double> to_physical(const SpectralVector& v, const CollocationGrid& grid) {
  require_finite(v, "to_physical");
  if (grid.points() < v.dim()) {
    throw std::domain_error("to_physical: grid smaller than the mode count");
  }
  const std::size_t m = grid.points();
  std::vector<double> in(m, 0.0), out(m);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (std::size_t k = 0; k < v.dim(); ++k) in[k] = v[k] * inv_sqrt2;
  grid.dst(in.data(), out.data());
  return out;
}

SpectralVector to_spectral(std::span<const double> values,
                           const CollocationGrid& grid, std::size_t n) {
  if (values.size() != grid.points()) {
    throw std::domain_error("to_spectral: value count must equal the grid size");
  }
  if (n > grid.points()) {
    throw std::domain_error("to_spectral: cannot resolve more modes than grid points");
  }
  const std::size_t m = grid.points();
  std::vector<double> out(m);
  grid.dst(values.data(), out.data());
  SpectralVector v(n);
  const double scale = 1.0 / (std::numbers::sqrt2 * static_cast<double>(m + 1));
  for (std::size_t k = 0; k < n; ++k) v[k] = out[k] * scale;
  return v;
}

namespace {

void pointwise(const NemytskijSpec& spec, int order, const CollocationGrid& grid,
               const double* u, const double* w1, const double* w2, double* out) {
  const std::size_t m = grid.points();
  if (spec.kind != NemytskijSpec::Kind::custom) {
    switch (order) {
      case 0:
        detail::apply_f(spec.kind, spec.scale, grid.nodes().data(), u, out, m);
        return;
      case 1:
        detail::apply_df(spec.kind, spec.scale, grid.nodes().data(), u, w1, out, m);
        return;
      default:
        detail::apply_d2f(spec.kind, spec.scale, grid.nodes().data(), u, w1, w2, out, m);
        return;
    }
  }
  const auto& nodes = grid.nodes();
  switch (order) {
    case 0:
      for (std::size_t j = 0; j < m; ++j) out[j] = spec.f(nodes[j], u[j]);
      return;
    case 1:
      for (std::size_t j = 0; j < m; ++j) out[j] = spec.df_dz(nodes[j], u[j]) * w1[j];
      return;
    default:
      for (std::size_t j = 0; j < m; ++j)
        out[j] = spec.d2f_dz2(nodes[j], u[j]) * w1[j] * w2[j];
      return;
  }
}

SpectralVector evaluate_impl(const NemytskijSpec& spec, int order,
                             const SpectralVector& v, const SpectralVector* w1,
                             const SpectralVector* w2, const CollocationGrid& grid) {
  if (v.dim() != grid.modes()) {
    throw std::domain_error("evaluate_F: vector dimension must match the grid modes");
  }
  const std::size_t n = v.dim();

  // Alias-free shortcuts: for f identically zero or diagonal-linear the
  // composition stays band-limited, so the transform pair is bypassed.
  if (spec.is_zero()) return SpectralVector(n);
  if (spec.is_diag_linear()) {
    const double a = spec.linear_rate();
    SpectralVector out(n);
    if (order == 0) {
      for (std::size_t i = 0; i < n; ++i) out[i] = a * v[i];
    } else if (order == 1) {
      for (std::size_t i = 0; i < n; ++i) out[i] = a * (*w1)[i];
    }
    return out;
  }

  std::vector<double> u = to_physical(v, grid);
  std::vector<double> pw1, pw2;
  if (order >= 1) pw1 = to_physical(*w1, grid);
  if (order >= 2) pw2 = to_physical(*w2, grid);
  std::vector<double> fu(grid.points());
  pointwise(spec, order, grid, u.data(), order >= 1 ? pw1.data() : nullptr,
            order >= 2 ? pw2.data() : nullptr, fu.data());
  for (double x : fu) {
    if (!std::isfinite(x)) {
      throw std::domain_error("evaluate_F: nonlinearity produced a non-finite value");
    }
  }
  return to_spectral(fu, grid, n);
}

}  // namespace

SpectralVector evaluate_F(const NemytskijSpec& spec, const SpectralVector& v,
                          const CollocationGrid& grid) {
  return evaluate_impl(spec, 0, v, nullptr, nullptr, grid);
}

SpectralVector evaluate_F_prime(const NemytskijSpec& spec, const SpectralVector& v,
                                const SpectralVector& w, const CollocationGrid& grid) {
  if (w.dim() != v.dim()) {
    throw std::domain_error("evaluate_F_prime: direction dimension mismatch");
  }
  require_finite(w, "evaluate_F_prime");
  return evaluate_impl(spec, 1, v, &w, nullptr, grid);
}

SpectralVector evaluate_F_second(const NemytskijSpec& spec, const SpectralVector& v,
                                 const SpectralVector& w1, const SpectralVector& w2,
                                 const CollocationGrid& grid) {
  if (w1.dim() != v.dim() || w2.dim() != v.dim()) {
    throw std::domain_error("evaluate_F_second: direction dimension mismatch");
  }
  require_finite(w1, "evaluate_F_second");
  require_finite(w2, "evaluate_F_second");
  return evaluate_impl(spec, 2, v, &w1, &w2, grid);
}

double aliasing_residual(const NemytskijSpec& spec, const SpectralVector& v,
                         const CollocationGrid& grid) {
  const SpectralVector coarse = evaluate_F(spec, v, grid);
  CollocationGrid fine(grid.modes(), CollocationGrid::default_points(grid.points()));
  const SpectralVector refined = evaluate_F(spec, v, fine);
  double sum = 0.0;
  for (std::size_t i = 0; i < coarse.dim(); ++i) {
    const double d = coarse[i] - refined[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

NonlinearityCheckReport check_nonlinearity(const NemytskijSpec& spec, std::size_t n,
                                           const CollocationGrid& grid,
                                           std::size_t samples, const SeedPath& path,
                                           double bound) {
  if (samples < 1) {
    throw std::domain_error("check_nonlinearity: need at least one sample");
  }
  NonlinearityCheckReport rep;
  rep.samples = samples;
  rep.bound = bound;

  auto draw = [&](std::uint64_t sample, std::uint32_t slot, double decay) {
    SpectralVector v(n);
    std::vector<double> xi(n);
    rng::fill_standard_normals(path.with_counter(sample), slot, xi);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = xi[i] * std::pow(static_cast<double>(i + 1), -decay);
    }
    return v;
  };

  for (std::uint64_t s = 0; s < samples; ++s) {
    // phi decays fast enough to lie in H^1; the probe directions only in H.
    const SpectralVector phi = draw(s, 0, 1.6);
    const SpectralVector psi = draw(s, 1, 0.6);
    const SpectralVector psi1 = draw(s, 2, 0.6);
    const SpectralVector psi2 = draw(s, 3, 0.6);

    const double growth =
        l2_norm(evaluate_F(spec, phi, grid)) / (l2_norm(phi) + 1.0);
    const double first =
        l2_norm(evaluate_F_prime(spec, phi, psi, grid)) / l2_norm(psi);
    const double second =
        sobolev_norm(evaluate_F_second(spec, phi, psi1, psi2, grid),
                     -2.0 * spec.exponents.eta) /
        (l2_norm(psi1) * l2_norm(psi2));
    const double dual =
        sobolev_norm(evaluate_F_prime(spec, phi, psi, grid), -spec.exponents.delta) /
        ((1.0 + sobolev_norm(phi, 1.0)) * sobolev_norm(psi, -1.0));

    rep.max_growth = std::max(rep.max_growth, growth);
    rep.max_first = std::max(rep.max_first, first);
    rep.max_second = std::max(rep.max_second, second);
    rep.max_dual = std::max(rep.max_dual, dual);
  }
  if (bound > 0.0) {
    rep.within_bound = rep.max_growth <= bound && rep.max_first <= bound &&
                       rep.max_second <= bound && rep.max_dual <= bound;
  }
  return rep;
}

}  // namespace sgee
