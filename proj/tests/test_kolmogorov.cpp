#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sgee/kolmogorov.hpp"
#include "sgee/noise.hpp"
#include "sgee/stats.hpp"

using namespace sgee;

namespace {

SpectralVector probe(std::size_t n, std::uint64_t stream, double scale = 0.5) {
  SpectralVector x(n);
  std::vector<double> xi(n);
  rng::fill_standard_normals(SeedPath{555, stream, 0}, 0, xi);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = scale * xi[i] / static_cast<double>(i + 1);
  }
  return x;
}

KolmogorovField cosine_field(std::size_t n, double a = 0.0,
                             CovarianceSpec cov = CovarianceSpec::white()) {
  std::vector<double> g(n, 0.0);
  g[0] = 1.0;
  if (n > 1) g[1] = 0.5;
  KolmogorovField field;
  field.drift_rate = a;
  field.cov = std::move(cov);
  field.functional = TestFunctional::cosine(g);
  field.n = n;
  return field;
}

}  // namespace

TEST_CASE("law propagation") {
  KolmogorovField field = cosine_field(4);
  const SpectralVector x = probe(4, 1);

  const GaussianState at0 = propagate_law(field, 0.0, x);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(at0.mean[i] == doctest::Approx(x[i]).epsilon(1e-15));
    CHECK(at0.var[i] == 0.0);
  }

  // Mode-1 variance at T = 1 matches the scalar closed form.
  const GaussianState at1 = propagate_law(field, 1.0, x);
  CHECK(at1.var[0] == doctest::Approx(0.05066059168563721).epsilon(1e-13));

  // Two-stage propagation composes: the flow property of the law.
  const double t = 0.3, s = 0.45;
  const GaussianState two = propagate_law(field, t + s, x);
  const GaussianState first = propagate_law(field, t, x);
  for (std::size_t i = 0; i < 4; ++i) {
    const double lam = eigenvalue(i + 1);
    const double carried = std::exp(-2.0 * lam * s) * first.var[i] +
                           propagate_law(field, s, x).var[i];
    CHECK(two.var[i] == doctest::Approx(carried).epsilon(1e-12));
    const double mean = std::exp(-lam * s) * first.mean[i];
    CHECK(two.mean[i] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("backward function values") {
  // mu(0, x) = Phi(x) for every kind.
  const SpectralVector x = probe(3, 2);
  for (auto kind : {TestFunctional::Kind::cosine, TestFunctional::Kind::linear,
                    TestFunctional::Kind::quadratic_diag}) {
    std::vector<double> g = {1.0, -0.3, 0.8};
    KolmogorovField field;
    field.cov = CovarianceSpec::white();
    field.n = 3;
    field.functional =
        kind == TestFunctional::Kind::cosine
            ? TestFunctional::cosine(g)
            : (kind == TestFunctional::Kind::linear ? TestFunctional::linear(g)
                                                    : TestFunctional::quadratic_diag(g));
    CHECK(mu(field, 0.0, x) ==
          doctest::Approx(evaluate(field.functional, x)).epsilon(1e-14));
  }

  // Linear functional: noise drops out, only the decayed mean survives.
  {
    std::vector<double> g = {2.0, 0.0, 1.0};
    KolmogorovField field;
    field.cov = CovarianceSpec::white();
    field.n = 3;
    field.functional = TestFunctional::linear(g);
    const double t = 0.4;
    double expect = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      expect += g[i] * std::exp(-eigenvalue(i + 1) * t) * x[i];
    }
    CHECK(mu(field, t, x) == doctest::Approx(expect).epsilon(1e-13));
  }

  // Frozen scalar value for the cosine kind, cross-checked by Monte Carlo
  // over exact endpoint draws.
  {
    KolmogorovField field = cosine_field(1);
    const SpectralVector e1 = SpectralVector::basis(1, 1);
    const double closed = mu(field, 1.0, e1);
    CHECK(closed == doctest::Approx(0.9749878231097715).epsilon(1e-12));

    MeanAccumulator mc;
    const std::size_t samples = 100000;
    for (std::size_t s = 0; s < samples; ++s) {
      SpectralVector draw = sample_exact_ou_endpoint(field.cov, 1.0, 1, SeedPath{3, s, 0});
      draw[0] += std::exp(-eigenvalue(1)) * e1[0];
      mc.add(std::cos(draw[0]));
    }
    CHECK(std::fabs(mc.mean() - closed) < 4.0 * mc.stderr_of_mean());
  }
}

TEST_CASE("gradients and Hessians match finite differences") {
  KolmogorovField field = cosine_field(5, 0.6);
  const double h = 1e-5;

  for (int trial = 0; trial < 20; ++trial) {
    const SpectralVector x = probe(5, 10 + trial);
    const double t = 0.05 + 0.04 * trial;
    const SpectralVector g = grad_mu(field, t, x);
    for (std::size_t k = 0; k < 5; ++k) {
      SpectralVector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (mu(field, t, xp) - mu(field, t, xm)) / (2.0 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  // t = 0 gradient is the raw functional derivative.
  {
    const SpectralVector x = probe(5, 40);
    const SpectralVector g0 = grad_mu(field, 0.0, x);
    for (std::size_t k = 0; k < 5; ++k) {
      SpectralVector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd =
          (evaluate(field.functional, xp) - evaluate(field.functional, xm)) / (2.0 * h);
      CHECK(g0[k] == doctest::Approx(fd).epsilon(1e-8));
    }
  }

  // Hessian quadratic form: symmetry is exact, values match second FD.
  const SpectralVector x = probe(5, 41);
  const SpectralVector w1 = probe(5, 42, 1.0);
  const SpectralVector w2 = probe(5, 43, 1.0);
  const double t = 0.35;
  CHECK(hess_mu_quadratic_form(field, t, x, w1, w2) ==
        hess_mu_quadratic_form(field, t, x, w2, w1));
  {
    const double hh = 1e-4;
    SpectralVector xp = x, xm = x;
    for (std::size_t i = 0; i < 5; ++i) {
      xp[i] += hh * w1[i];
      xm[i] -= hh * w1[i];
    }
    const double fd =
        (mu(field, t, xp) - 2.0 * mu(field, t, x) + mu(field, t, xm)) / (hh * hh);
    CHECK(hess_mu_quadratic_form(field, t, x, w1, w1) ==
          doctest::Approx(fd).epsilon(1e-5));
  }

  // Linear kind: gradient independent of x, Hessian identically zero.
  {
    std::vector<double> g = {1.0, 0.5, 0.0, 0.0, 0.0};
    KolmogorovField lin;
    lin.cov = CovarianceSpec::white();
    lin.n = 5;
    lin.functional = TestFunctional::linear(g);
    const SpectralVector ga = grad_mu(lin, 0.7, probe(5, 44));
    const SpectralVector gb = grad_mu(lin, 0.7, probe(5, 45));
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(ga[i] == gb[i]);
      CHECK(ga[i] == doctest::Approx(g[i] * std::exp(-eigenvalue(i + 1) * 0.7))
                         .epsilon(1e-13));
    }
    CHECK(hess_mu_quadratic_form(lin, 0.7, x, w1, w2) == 0.0);
  }

  // Diagonal Hessian trace agrees with the explicit sum of basis forms.
  std::vector<double> weights = {0.2, -0.1, 0.7, 0.0, 1.3};
  double by_basis = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const SpectralVector ek = SpectralVector::basis(k + 1, 5);
    by_basis += weights[k] * hess_mu_quadratic_form(field, t, x, ek, ek);
  }
  CHECK(hess_mu_diag_trace(field, t, x, weights) ==
        doctest::Approx(by_basis).epsilon(1e-13));
}

TEST_CASE("time-reversed transform and its chain rule") {
  KolmogorovField field = cosine_field(4, 0.0);
  const SpectralVector y = probe(4, 50);

  CHECK(nu(field, 0.0, y) ==
        doctest::Approx(evaluate(field.functional, y)).epsilon(1e-14));

  // nu(t, y) = mu(t, E(-t) y) by construction; check the gradient and the
  // Hessian against finite differences of nu itself.
  const double t = 0.5;
  const double h = 1e-6;
  const SpectralVector g = grad_nu(field, t, y);
  for (std::size_t k = 0; k < 4; ++k) {
    SpectralVector yp = y, ym = y;
    yp[k] += h;
    ym[k] -= h;
    const double fd = (nu(field, t, yp) - nu(field, t, ym)) / (2.0 * h);
    CHECK(g[k] == doctest::Approx(fd).epsilon(1e-7));
  }
  {
    const SpectralVector z = probe(4, 51, 1.0);
    const double hh = 1e-4;
    SpectralVector yp = y, ym = y;
    for (std::size_t i = 0; i < 4; ++i) {
      yp[i] += hh * z[i];
      ym[i] -= hh * z[i];
    }
    const double fd =
        (nu(field, t, yp) - 2.0 * nu(field, t, y) + nu(field, t, ym)) / (hh * hh);
    CHECK(hess_nu_quadratic_form(field, t, y, z, z) ==
          doctest::Approx(fd).epsilon(1e-5));
  }

  // Past the exponent range the transform refuses to evaluate.
  KolmogorovField big = cosine_field(512);
  CHECK_THROWS_AS((void)nu(big, 1.0, probe(512, 52)), std::range_error);
}

TEST_CASE("backward-equation residuals vanish") {
  // Closed-form family: residuals are pure FD error, well under 1e-6.
  KolmogorovField field = cosine_field(4, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const SpectralVector x = probe(4, 60 + trial);
    const double t = 0.1 + 0.08 * trial;
    CHECK(std::fabs(kolmogorov_residual(field, t, x)) < 1e-6);
    CHECK(std::fabs(nu_residual(field, t, x)) < 1e-6);
  }

  // Drift-free linear functional: the equation closes analytically.
  {
    std::vector<double> g = {1.0, 0.2, 0.0, 0.0};
    KolmogorovField lin;
    lin.cov = CovarianceSpec::white();
    lin.n = 4;
    lin.functional = TestFunctional::linear(g);
    for (int trial = 0; trial < 5; ++trial) {
      const SpectralVector x = probe(4, 80 + trial);
      CHECK(std::fabs(kolmogorov_residual(lin, 0.2 + 0.1 * trial, x)) < 1e-9);
    }
  }

  // Early-time probe with the FD stencil still inside (0, T).
  const SpectralVector x = probe(4, 90);
  CHECK(std::fabs(kolmogorov_residual(field, 5e-4, x)) < 1e-6);
}

TEST_CASE("gradient smoothing bound of the closed-form family") {
  // || (-A)^g Dmu(t,x) || t^g stays below ||g_vec|| (g/e)^g uniformly.
  const std::size_t n = 64;
  std::vector<double> ones(n, 1.0);
  KolmogorovField field;
  field.cov = CovarianceSpec::white();
  field.n = n;
  field.functional = TestFunctional::cosine(ones);
  const double gnorm = std::sqrt(static_cast<double>(n));

  for (double gamma : {0.25, 0.5, 0.75}) {
    const double bound = gnorm * std::pow(gamma / std::numbers::e, gamma);
    double worst = 0.0;
    for (double t = 1e-3; t <= 1.0; t *= 1.6) {
      const SpectralVector x = probe(n, 95);
      const SpectralVector g = grad_mu(field, t, x);
      const SpectralVector weighted = apply_fractional_power(g, gamma);
      worst = std::max(worst, l2_norm(weighted) * std::pow(t, gamma));
    }
    CHECK(worst <= bound * (1.0 + 1e-9));
    CHECK(worst > 0.0);
  }
}
