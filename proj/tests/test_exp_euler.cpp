#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sgee/exp_euler.hpp"
#include "sgee/quadrature.hpp"
#include "sgee/stats.hpp"

using namespace sgee;

namespace {

SchemeConfig linear_config(std::size_t n, double T, std::size_t M, double a,
                           CovarianceSpec cov = CovarianceSpec::white()) {
  return SchemeConfig::uniform(n, T, M, std::move(cov),
                               a == 0.0 ? nonlinearity::zero()
                                        : nonlinearity::diag_linear(a),
                               power_law_initial(n));
}

}  // namespace

TEST_CASE("single step closed forms") {
  CollocationGrid grid(4);

  // Deterministic decay with F = 0, q = 0.
  {
    SchemeConfig cfg = SchemeConfig::uniform(4, 0.1, 1, CovarianceSpec::custom({0, 0, 0, 0}),
                                             nonlinearity::zero(),
                                             SpectralVector::basis(1, 4));
    const NoiseIncrement inc =
        sample_filtered_increment(cfg.cov, cfg.tau, 4, SeedPath{1, 0, 0});
    const SpectralVector y = step(cfg, cfg.x0, inc, grid);
    CHECK(y[0] == doctest::Approx(0.3727078388534379).epsilon(1e-13));
    CHECK(y[1] == 0.0);
  }

  // Diagonal linear drift multiplies by (1 + a tau) before the decay.
  {
    SchemeConfig cfg = SchemeConfig::uniform(4, 0.1, 1, CovarianceSpec::custom({0, 0, 0, 0}),
                                             nonlinearity::diag_linear(1.0),
                                             SpectralVector::basis(1, 4));
    const NoiseIncrement inc =
        sample_filtered_increment(cfg.cov, cfg.tau, 4, SeedPath{1, 0, 0});
    const SpectralVector y = step(cfg, cfg.x0, inc, grid);
    CHECK(y[0] == doctest::Approx(0.4099786227387817).epsilon(1e-13));
  }

  // From the origin with F = 0 the step returns the increment itself.
  {
    SchemeConfig cfg = SchemeConfig::uniform(4, 0.1, 1, CovarianceSpec::white(),
                                             nonlinearity::zero(), SpectralVector(4));
    const NoiseIncrement inc =
        sample_filtered_increment(cfg.cov, cfg.tau, 4, SeedPath{2, 5, 0});
    const SpectralVector y = step(cfg, cfg.x0, inc, grid);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == inc.values[i]);
  }

  // Mismatched increment length is rejected.
  {
    SchemeConfig cfg = SchemeConfig::uniform(4, 0.1, 1, CovarianceSpec::white(),
                                             nonlinearity::zero(), SpectralVector(4));
    NoiseIncrement inc = sample_filtered_increment(cfg.cov, 0.05, 4, SeedPath{});
    CHECK_THROWS_AS((void)step(cfg, cfg.x0, inc, grid), std::domain_error);
  }
}

TEST_CASE("integrate: determinism and the single-step reduction") {
  SchemeConfig cfg = linear_config(6, 0.25, 1, 0.0);
  const SeedPath path{42, 3, 0};

  const SchemePath one = integrate(cfg, path);
  CHECK(one.states.size() == 2);
  CollocationGrid grid(6);
  const NoiseIncrement inc = sample_filtered_increment(cfg.cov, cfg.tau, 6, path);
  const SpectralVector manual = step(cfg, cfg.x0, inc, grid);
  for (std::size_t i = 0; i < 6; ++i) CHECK(one.states[1][i] == manual[i]);

  SchemeConfig cfg8 = linear_config(6, 0.25, 8, 0.0);
  const SchemePath a = integrate(cfg8, path);
  const SchemePath b = integrate(cfg8, path);
  for (std::size_t m = 0; m <= 8; ++m) {
    for (std::size_t i = 0; i < 6; ++i) CHECK(a.states[m][i] == b.states[m][i]);
  }

  // Engine endpoint agrees with the state-recording path.
  const SpectralVector end = integrate_endpoint(cfg8, path);
  for (std::size_t i = 0; i < 6; ++i) CHECK(end[i] == a.states[8][i]);
}

TEST_CASE("linear endpoint matches the direct-summation oracle") {
  SchemeConfig cfg = linear_config(5, 1.0, 16, 0.0, CovarianceSpec::power_decay(1.5));
  const SeedPath path{17, 11, 0};
  const SpectralVector end = integrate_endpoint(cfg, path);

  // Oracle: Y_M = e^{-lambda T} x0 + sum_m e^{-lambda (M-1-m) tau} inc_m,
  // re-deriving each filtered increment independently.
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double lam = eigenvalue(i + 1);
    double expect = std::exp(-lam * cfg.T) * cfg.x0[i];
    for (std::size_t m = 0; m < cfg.steps; ++m) {
      const NoiseIncrement inc =
          sample_filtered_increment(cfg.cov, cfg.tau, cfg.n, path.with_counter(m));
      expect += std::exp(-lam * cfg.tau * static_cast<double>(cfg.steps - 1 - m)) *
                inc.values[i];
    }
    CHECK(end[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("scheme endpoint law: formula vs oracle and empirical moments") {
  SchemeConfig cfg = linear_config(4, 1.0, 32, 0.4, CovarianceSpec::power_decay(2.0));
  const GaussianState law = scheme_endpoint_law(cfg);

  // Direct-summation variance oracle: var = sum_m rho^{2(M-1-m)} step_var.
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double lam = eigenvalue(i + 1);
    const double rho = std::exp(-lam * cfg.tau) * (1.0 + 0.4 * cfg.tau);
    const double step_var = cfg.tau * cfg.cov.q(i + 1) * std::exp(-2.0 * lam * cfg.tau);
    double var = 0.0;
    double mean = cfg.x0[i];
    for (std::size_t m = 0; m < cfg.steps; ++m) {
      var = rho * rho * var + step_var;
      mean *= rho;
    }
    CHECK(law.var[i] == doctest::Approx(var).epsilon(1e-12));
    CHECK(law.mean[i] == doctest::Approx(mean).epsilon(1e-12));
  }

  // Empirical moments across simulated paths.
  MeanAccumulator mode0, mode0sq;
  const std::size_t samples = 20000;
  ExpEulerEngine engine(cfg);
  std::vector<double> buf;
  for (std::size_t s = 0; s < samples; ++s) {
    engine.run(SeedPath{1234, s, 0}, buf);
    mode0.add(buf[0]);
    mode0sq.add((buf[0] - law.mean[0]) * (buf[0] - law.mean[0]));
  }
  CHECK(std::fabs(mode0.mean() - law.mean[0]) <
        4.0 * std::sqrt(law.var[0] / samples));
  CHECK(std::fabs(mode0sq.mean() - law.var[0]) <
        4.0 * law.var[0] * std::sqrt(2.0 / samples));
}

TEST_CASE("continuous extension couples to the next state") {
  SchemeConfig cfg = linear_config(6, 0.5, 4, 0.0);
  CollocationGrid grid(6);
  const SeedPath path{77, 2, 0};

  SpectralVector y = cfg.x0;
  for (std::size_t m = 0; m < cfg.steps; ++m) {
    const SeedPath sp = path.with_counter(m);

    // Interior point: deterministic part plus the filtered partial noise.
    const auto [to_mid, rest] =
        sample_subinterval_pair(cfg.cov, cfg.tau, 0.5 * cfg.tau, cfg.n, sp);
    const SpectralVector mid = continuous_extension(cfg, y, 0.5 * cfg.tau, to_mid, grid);
    CHECK(mid.all_finite());

    // Endpoint: the extension equals the next scheme state exactly.
    const auto [to_end, none] =
        sample_subinterval_pair(cfg.cov, cfg.tau, cfg.tau, cfg.n, sp);
    const SpectralVector at_end = continuous_extension(cfg, y, cfg.tau, to_end, grid);
    const NoiseIncrement inc = sample_filtered_increment(cfg.cov, cfg.tau, cfg.n, sp);
    const SpectralVector next = step(cfg, y, inc, grid);
    for (std::size_t i = 0; i < cfg.n; ++i) CHECK(at_end[i] == next[i]);
    y = next;
  }

  // Without drift or noise the extension is the pure decay.
  SchemeConfig quiet = SchemeConfig::uniform(3, 0.5, 4, CovarianceSpec::custom({0, 0, 0}),
                                             nonlinearity::zero(),
                                             SpectralVector::basis(1, 3));
  CollocationGrid grid3(3);
  const auto [to_s, ignored] =
      sample_subinterval_pair(quiet.cov, quiet.tau, 0.03, 3, SeedPath{});
  const SpectralVector ext = continuous_extension(quiet, quiet.x0, 0.03, to_s, grid3);
  CHECK(ext[0] == doctest::Approx(std::exp(-eigenvalue(1) * 0.03)).epsilon(1e-14));
}

TEST_CASE("coupled pair: refinement one reproduces the plain path") {
  SchemeConfig cfg = linear_config(8, 0.5, 8, 0.0);
  const SeedPath path{31, 4, 0};
  const CoupledEndpoints pair = integrate_coupled_pair(cfg, 1, path);
  const SpectralVector plain = integrate_endpoint(cfg, path);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    CHECK(pair.coarse[i] == plain[i]);
    CHECK(pair.fine[i] == plain[i]);
  }
}

TEST_CASE("fine reference matches the exact law and closes the gap") {
  SchemeConfig cfg = linear_config(4, 1.0, 4, 0.0);

  // Endpoint of the refined path has nearly the exact mild-solution law.
  const std::size_t samples = 20000;
  MeanAccumulator var0;
  ExpEulerEngine engine(cfg);
  std::vector<double> coarse, fine;
  for (std::size_t s = 0; s < samples; ++s) {
    engine.run_coupled(SeedPath{50, s, 0}, 64, coarse, fine);
    var0.add(fine[0] * fine[0]);
  }
  const double exact_var = (1.0 - std::exp(-2.0 * eigenvalue(1))) / (2.0 * eigenvalue(1));
  const double mean_sq = std::exp(-2.0 * eigenvalue(1)) * cfg.x0[0] * cfg.x0[0];
  // The refined path still carries an O(lambda_1 tau/64) variance deficit.
  CHECK(std::fabs(var0.mean() - (exact_var + mean_sq)) <
        5.0 * exact_var * std::sqrt(2.0 / samples) + 0.05 * exact_var);

  // Coarse-fine distance shrinks monotonically in tau (coupled paths).
  double prev = 1e300;
  for (std::size_t M : {4u, 8u, 16u, 32u}) {
    SchemeConfig c = linear_config(4, 1.0, M, 0.0);
    ExpEulerEngine e(c);
    MeanAccumulator gap;
    for (std::size_t s = 0; s < 2000; ++s) {
      e.run_coupled(SeedPath{60, s, 0}, 16, coarse, fine);
      double d2 = 0.0;
      for (std::size_t i = 0; i < c.n; ++i) {
        d2 += (coarse[i] - fine[i]) * (coarse[i] - fine[i]);
      }
      gap.add(d2);
    }
    CHECK(gap.mean() < prev);
    prev = gap.mean();
  }
}

TEST_CASE("exact linear endpoint draws") {
  // a = 0 and x0 = 0 reduces to the stochastic-convolution sampler.
  SchemeConfig cfg = SchemeConfig::uniform(3, 1.0, 4, CovarianceSpec::white(),
                                           nonlinearity::zero(), SpectralVector(3));
  const SeedPath path{8, 21, 0};
  const SpectralVector a = exact_linear_endpoint(cfg, path);
  const SpectralVector b = sample_exact_ou_endpoint(cfg.cov, cfg.T, cfg.n, path);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == b[i]);

  // Vanishing horizon returns the initial state.
  SchemeConfig tiny = SchemeConfig::uniform(3, 1e-12, 1, CovarianceSpec::white(),
                                            nonlinearity::zero(), power_law_initial(3));
  const SpectralVector t0 = exact_linear_endpoint(tiny, path);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(t0[i] == doctest::Approx(tiny.x0[i]).epsilon(1e-5));
  }

  // Variance formula against numerical quadrature of the isometry integral.
  SchemeConfig drifted = linear_config(3, 0.7, 4, 0.9);
  const GaussLegendre gl(60);
  for (std::size_t i = 0; i < 3; ++i) {
    const double rate = eigenvalue(i + 1) - 0.9;
    const double by_quadrature = gl.integrate(
        [&](double s) { return std::exp(-2.0 * rate * (drifted.T - s)); }, 0.0,
        drifted.T);
    const double closed = (-std::expm1(-2.0 * rate * drifted.T)) / (2.0 * rate);
    CHECK(closed == doctest::Approx(by_quadrature).epsilon(1e-10));
  }

  // Non-dissipative drift is rejected.
  SchemeConfig bad = linear_config(3, 1.0, 4, eigenvalue(1) + 1.0);
  CHECK_THROWS_AS((void)exact_linear_endpoint(bad, path), std::domain_error);
}

TEST_CASE("diverging nonlinear paths raise an integration error") {
  const NemytskijSpec cubic = nonlinearity::custom(
      "cubic", [](double, double z) { return z * z * z; },
      [](double, double z) { return 3.0 * z * z; },
      [](double, double z) { return 6.0 * z; }, [](double, double) { return 0.0; },
      1.0, {});
  SpectralVector huge(2);
  huge[0] = 3e5;
  SchemeConfig cfg = SchemeConfig::uniform(2, 1.0, 8, CovarianceSpec::custom({0, 0}),
                                           cubic, huge);
  CHECK_THROWS_AS((void)integrate_endpoint(cfg, SeedPath{}), IntegrationError);
  try {
    (void)integrate_endpoint(cfg, SeedPath{});
  } catch (const IntegrationError& e) {
    CHECK(e.step() < cfg.steps);
  }
}
