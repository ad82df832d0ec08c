#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgee/nemytskij.hpp"
#include "sgee/rng.hpp"

using namespace sgee;

namespace {

SpectralVector random_vector(std::size_t n, std::uint64_t stream, double decay = 1.0) {
  SpectralVector v(n);
  std::vector<double> xi(n);
  rng::fill_standard_normals(SeedPath{777, stream, 0}, 0, xi);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = xi[i] * std::pow(static_cast<double>(i + 1), -decay);
  }
  return v;
}

double max_abs_diff(const SpectralVector& a, const SpectralVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    m = std::max(m, std::fabs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("grid layout and transform pair") {
  const std::size_t n = 8;
  CollocationGrid grid(n);
  CHECK(grid.points() >= 2 * n + 1);

  // Midpoint evaluation of the first basis function.
  const std::size_t m = grid.points();
  REQUIRE((m + 1) % 2 == 0);
  const SpectralVector e1 = SpectralVector::basis(1, n);
  const std::vector<double> phys = to_physical(e1, grid);
  const std::size_t mid = (m + 1) / 2 - 1;  // node at xi = 1/2
  CHECK(grid.nodes()[mid] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(phys[mid] == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));

  // Zero in, zero out.
  const std::vector<double> zeros = to_physical(SpectralVector(n), grid);
  for (double x : zeros) CHECK(x == 0.0);

  // Round trip is the identity on band-limited data.
  const SpectralVector v = random_vector(n, 1);
  const SpectralVector back = to_spectral(to_physical(v, grid), grid, n);
  CHECK(max_abs_diff(v, back) < 1e-12);

  // Sampling e_2 exactly recovers the unit coefficient.
  const SpectralVector e2 = SpectralVector::basis(2, n);
  const SpectralVector coeffs = to_spectral(to_physical(e2, grid), grid, n);
  CHECK(coeffs[1] == doctest::Approx(1.0).epsilon(1e-13));
  for (std::size_t i = 0; i < n; ++i) {
    if (i != 1) CHECK(std::fabs(coeffs[i]) < 1e-12);
  }

  // Plain sin(pi x) has coefficient 1/sqrt(2) against the unit basis.
  std::vector<double> plain(m);
  for (std::size_t j = 0; j < m; ++j) {
    plain[j] = std::sin(std::numbers::pi * grid.nodes()[j]);
  }
  const SpectralVector sine_coeffs = to_spectral(plain, grid, n);
  CHECK(sine_coeffs[0] == doctest::Approx(0.7071067811865476).epsilon(1e-13));

  CHECK_THROWS_AS((void)CollocationGrid(8, 4), std::domain_error);
  std::vector<double> wrong(m + 1, 0.0);
  CHECK_THROWS_AS((void)to_spectral(wrong, grid, n), std::domain_error);
}

TEST_CASE("composition operator on the catalog") {
  const std::size_t n = 16;
  CollocationGrid grid(n);
  const SpectralVector v = random_vector(n, 2);

  // f == 0.
  const SpectralVector z = evaluate_F(nonlinearity::zero(), v, grid);
  for (std::size_t i = 0; i < n; ++i) CHECK(z[i] == 0.0);

  // Identity map: both the shortcut and the transform route are exact.
  const SpectralVector ident = evaluate_F(nonlinearity::diag_linear(1.0), v, grid);
  CHECK(max_abs_diff(ident, v) < 1e-15);
  const NemytskijSpec custom_ident = nonlinearity::custom(
      "ident", [](double, double z_) { return z_; },
      [](double, double) { return 1.0; }, [](double, double) { return 0.0; },
      [](double, double) { return 0.0; }, 1.0, {});
  const SpectralVector ident2 = evaluate_F(custom_ident, v, grid);
  CHECK(max_abs_diff(ident2, v) < 1e-12);

  // Pure forcing sin(pi x): mode one, coefficient 1/sqrt(2).
  const SpectralVector forced =
      evaluate_F(nonlinearity::sine_forced(0.0), v, grid);
  CHECK(forced[0] == doctest::Approx(0.7071067811865476).epsilon(1e-12));
  for (std::size_t i = 1; i < n; ++i) CHECK(std::fabs(forced[i]) < 1e-12);

  // Affine f = a z + g(x) with band-limited g stays exact.
  const double a = 0.7;
  const NemytskijSpec affine = nonlinearity::custom(
      "affine", [a](double xi, double z_) { return a * z_ + std::sin(std::numbers::pi * xi); },
      [a](double, double) { return a; }, [](double, double) { return 0.0; },
      [](double, double) { return 0.0; }, std::max(a, 1.0), {});
  const SpectralVector affine_out = evaluate_F(affine, v, grid);
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = a * v[i] + (i == 0 ? 0.7071067811865476 : 0.0);
    CHECK(affine_out[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("derivatives match finite differences of the composition") {
  const std::size_t n = 12;
  CollocationGrid grid(n);
  const NemytskijSpec f = nonlinearity::sine(1.0);
  const SpectralVector v = random_vector(n, 3);
  const SpectralVector w = random_vector(n, 4);
  const SpectralVector w2 = random_vector(n, 5);

  // First derivative at h = 1e-5, relative 1e-8.
  const SpectralVector exact = evaluate_F_prime(f, v, w, grid);
  {
    const double h = 1e-5;
    SpectralVector vp = v, vm = v;
    for (std::size_t i = 0; i < n; ++i) {
      vp[i] += h * w[i];
      vm[i] -= h * w[i];
    }
    const SpectralVector fp = evaluate_F(f, vp, grid);
    const SpectralVector fm = evaluate_F(f, vm, grid);
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = (fp[i] - fm[i]) / (2.0 * h);
      CHECK(fd == doctest::Approx(exact[i]).epsilon(1e-8));
    }
  }

  // Central differences converge at second order: shrinking h by 10 cuts the
  // defect by about 100.
  auto fd_defect = [&](double h) {
    SpectralVector vp = v, vm = v;
    for (std::size_t i = 0; i < n; ++i) {
      vp[i] += h * w[i];
      vm[i] -= h * w[i];
    }
    const SpectralVector fp = evaluate_F(f, vp, grid);
    const SpectralVector fm = evaluate_F(f, vm, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::fabs((fp[i] - fm[i]) / (2.0 * h) - exact[i]));
    }
    return worst;
  };
  const double d3 = fd_defect(1e-3);
  const double d4 = fd_defect(1e-4);
  CHECK(d4 < d3 * 0.02);  // ~1e-2 expected from O(h^2)

  // Zero derivative cases.
  const SpectralVector lin = evaluate_F_prime(nonlinearity::diag_linear(2.0), v, w, grid);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(lin[i] == doctest::Approx(2.0 * w[i]).epsilon(1e-15));
  }
  const SpectralVector none =
      evaluate_F_prime(nonlinearity::sine_forced(0.0), v, w, grid);
  for (std::size_t i = 0; i < n; ++i) CHECK(none[i] == 0.0);

  // Second derivative: symmetric bit for bit, matches the FD oracle.
  const SpectralVector s12 = evaluate_F_second(f, v, w, w2, grid);
  const SpectralVector s21 = evaluate_F_second(f, v, w2, w, grid);
  for (std::size_t i = 0; i < n; ++i) CHECK(s12[i] == s21[i]);

  {
    const double h = 1e-4;
    SpectralVector vp = v, vm = v;
    for (std::size_t i = 0; i < n; ++i) {
      vp[i] += h * w[i];
      vm[i] -= h * w[i];
    }
    const SpectralVector fp = evaluate_F(f, vp, grid);
    const SpectralVector fm = evaluate_F(f, vm, grid);
    const SpectralVector f0 = evaluate_F(f, v, grid);
    const SpectralVector dww = evaluate_F_second(f, v, w, w, grid);
    for (std::size_t i = 0; i < n; ++i) {
      const double fd = (fp[i] - 2.0 * f0[i] + fm[i]) / (h * h);
      CHECK(fd == doctest::Approx(dww[i]).epsilon(1e-6));
    }
  }

  const SpectralVector lin2 = evaluate_F_second(nonlinearity::diag_linear(1.0), v, w, w2, grid);
  for (std::size_t i = 0; i < n; ++i) CHECK(lin2[i] == 0.0);
}

TEST_CASE("aliasing diagnostic stays small on smooth states") {
  const std::size_t n = 16;
  CollocationGrid grid(n);
  const SpectralVector v = random_vector(n, 6, 2.0);
  CHECK(aliasing_residual(nonlinearity::sine(1.0), v, grid) < 1e-6);
}

TEST_CASE("growth and derivative ratio checks") {
  const SeedPath path{99, 0, 0};

  // f == 0: every ratio vanishes.
  {
    CollocationGrid grid(16);
    const NonlinearityCheckReport rep =
        check_nonlinearity(nonlinearity::zero(), 16, grid, 50, path, 1.0);
    CHECK(rep.max_growth == 0.0);
    CHECK(rep.max_first == 0.0);
    CHECK(rep.max_second == 0.0);
    CHECK(rep.within_bound);
  }

  // Identity drift: no curvature, first-derivative ratio about 1.
  {
    CollocationGrid grid(16);
    const NonlinearityCheckReport rep =
        check_nonlinearity(nonlinearity::diag_linear(1.0), 16, grid, 50, path);
    CHECK(rep.max_second < 1e-12);
    CHECK(rep.max_first == doctest::Approx(1.0).epsilon(1e-9));
  }

  // sin(z): ratios bounded and stable as the truncation doubles.
  {
    double prev_second = 0.0;
    double prev_dual = 0.0;
    for (std::size_t n : {32u, 64u, 128u}) {
      CollocationGrid grid(n);
      const NonlinearityCheckReport rep =
          check_nonlinearity(nonlinearity::sine(1.0), n, grid, 1000, path);
      CHECK(rep.max_growth <= 1.0 + 1e-9);
      CHECK(rep.max_first <= 1.0 + 1e-9);
      if (prev_second > 0.0) {
        CHECK(rep.max_second <= prev_second * 1.1 + 1e-9);
        CHECK(rep.max_dual <= prev_dual * 1.1 + 1e-9);
      }
      prev_second = rep.max_second;
      prev_dual = rep.max_dual;
    }
  }
}
