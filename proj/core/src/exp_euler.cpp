#include "sgee/exp_euler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "nemytskij_internal.hpp"

namespace sgee {

namespace {

constexpr double kDivergenceCap = 1e12;

void check_dim(const SchemeConfig& cfg, const SpectralVector& v, const char* what) {
  if (v.dim() != cfg.n) {
    throw std::domain_error(std::string(what) + ": dimension mismatch");
  }
}

}  // namespace

void SchemeConfig::validate() const {
  if (n < 1) throw std::domain_error("SchemeConfig: n must be >= 1");
  if (!(tau > 0.0)) throw std::domain_error("SchemeConfig: tau must be > 0");
  if (steps < 1) throw std::domain_error("SchemeConfig: need at least one step");
  if (!(T > 0.0)) throw std::domain_error("SchemeConfig: T must be > 0");
  if (std::fabs(tau * static_cast<double>(steps) - T) > 1e-12 * T) {
    throw std::domain_error("SchemeConfig: tau * M must equal T");
  }
  if (x0.dim() != n) {
    throw std::domain_error("SchemeConfig: x0 dimension must equal n");
  }
  require_finite(x0, "SchemeConfig::x0");
}

SchemeConfig SchemeConfig::uniform(std::size_t n, double T, std::size_t M,
                                   CovarianceSpec cov, NemytskijSpec f,
                                   SpectralVector x0) {
  SchemeConfig cfg;
  cfg.n = n;
  cfg.T = T;
  cfg.steps = M;
  cfg.tau = T / static_cast<double>(M);
  cfg.cov = std::move(cov);
  cfg.f = std::move(f);
  cfg.x0 = std::move(x0);
  cfg.validate();
  return cfg;
}

SpectralVector power_law_initial(std::size_t n, double p, double scale) {
  SpectralVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = scale * std::pow(static_cast<double>(i + 1), -p);
  }
  return v;
}

SpectralVector step(const SchemeConfig& cfg, const SpectralVector& y,
                    const NoiseIncrement& inc, const CollocationGrid& grid) {
  cfg.validate();
  check_dim(cfg, y, "step");
  require_finite(y, "step");
  if (inc.values.dim() != cfg.n) {
    throw std::domain_error("step: increment dimension mismatch");
  }
  if (std::fabs(inc.dt - cfg.tau) > 1e-12 * cfg.tau) {
    throw std::domain_error("step: increment length must equal tau");
  }
  const SpectralVector Fy = evaluate_F(cfg.f, y, grid);
  SpectralVector out(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double decay = std::exp(-eigenvalue(i + 1) * cfg.tau);
    out[i] = decay * (y[i] + cfg.tau * Fy[i]) + inc.values[i];
  }
  return out;
}

SpectralVector continuous_extension(const SchemeConfig& cfg, const SpectralVector& y_m,
                                    double s, const NoiseIncrement& bare_to_s,
                                    const CollocationGrid& grid) {
  cfg.validate();
  check_dim(cfg, y_m, "continuous_extension");
  if (!(s > 0.0 && s <= cfg.tau)) {
    throw std::domain_error("continuous_extension: s must lie in (0, tau]");
  }
  if (bare_to_s.values.dim() != cfg.n) {
    throw std::domain_error("continuous_extension: increment dimension mismatch");
  }
  if (std::fabs(bare_to_s.dt - s) > 1e-12 * cfg.tau) {
    throw std::domain_error(
        "continuous_extension: increment was drawn for a different interior time");
  }
  const SpectralVector Fy = evaluate_F(cfg.f, y_m, grid);
  SpectralVector out(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double decay = std::exp(-eigenvalue(i + 1) * s);
    out[i] = decay * (y_m[i] + s * Fy[i]) + decay * bare_to_s.values[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engine

struct ExpEulerEngine::Impl {
  CollocationGrid grid;
  std::size_t n;
  std::size_t m;
  bool linear;          // diagonal-linear drift: skip the transform pair
  double linear_rate;
  // tables
  std::vector<double> sqrt_q;
  std::vector<double> lambda;
  // scratch
  std::vector<double> xi;       // normals
  std::vector<double> pad;      // spectral -> grid input
  std::vector<double> phys;     // physical values
  std::vector<double> fu;       // f(xi, u)
  std::vector<double> fcoef;    // spectral F
  std::vector<double> raw_sum;  // coupled coarse accumulation

  explicit Impl(const SchemeConfig& cfg)
      : grid(cfg.n),
        n(cfg.n),
        m(grid.points()),
        linear(cfg.f.is_diag_linear()),
        linear_rate(cfg.f.linear_rate()),
        sqrt_q(cfg.n),
        lambda(cfg.n),
        xi(cfg.n),
        pad(m, 0.0),
        phys(m),
        fu(m),
        fcoef(cfg.n),
        raw_sum(cfg.n) {
    for (std::size_t i = 0; i < cfg.n; ++i) {
      sqrt_q[i] = std::sqrt(cfg.cov.q(i + 1));
      lambda[i] = eigenvalue(i + 1);
    }
  }

  // F(y) into fcoef.
  void eval_F(const SchemeConfig& cfg, const double* y) {
    if (linear) {
      for (std::size_t i = 0; i < n; ++i) fcoef[i] = linear_rate * y[i];
      return;
    }
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    for (std::size_t i = 0; i < n; ++i) pad[i] = y[i] * inv_sqrt2;
    grid.dst(pad.data(), phys.data());
    if (cfg.f.kind == NemytskijSpec::Kind::custom) {
      const auto& nodes = grid.nodes();
      for (std::size_t j = 0; j < m; ++j) fu[j] = cfg.f.f(nodes[j], phys[j]);
    } else {
      detail::apply_f(cfg.f.kind, cfg.f.scale, grid.nodes().data(), phys.data(),
                      fu.data(), m);
    }
    grid.dst(fu.data(), phys.data());
    const double scale = 1.0 / (std::numbers::sqrt2 * static_cast<double>(m + 1));
    for (std::size_t i = 0; i < n; ++i) fcoef[i] = phys[i] * scale;
  }

  // One step in place; decay[i] = exp(-lambda_i * dt).  `bare` holds
  // sqrt(q) * (W(t+dt) - W(t)) per mode.
  void advance(const SchemeConfig& cfg, double dt, const std::vector<double>& decay,
               const double* bare, std::vector<double>& y, std::size_t step_index) {
    eval_F(cfg, y.data());
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = decay[i] * (y[i] + dt * fcoef[i]) + decay[i] * bare[i];
      y[i] = next;
      max_abs = std::max(max_abs, std::fabs(next));
    }
    if (!(max_abs <= kDivergenceCap)) {
      throw IntegrationError(step_index, "integrate: path diverged");
    }
  }
};

ExpEulerEngine::ExpEulerEngine(SchemeConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  impl_ = std::make_unique<Impl>(cfg_);
}

ExpEulerEngine::~ExpEulerEngine() = default;
ExpEulerEngine::ExpEulerEngine(ExpEulerEngine&&) noexcept = default;

void ExpEulerEngine::run(const SeedPath& path, std::vector<double>& out) {
  Impl& im = *impl_;
  out.assign(cfg_.n, 0.0);
  std::vector<double>& y = out;
  for (std::size_t i = 0; i < cfg_.n; ++i) y[i] = cfg_.x0[i];

  std::vector<double> decay(cfg_.n);
  for (std::size_t i = 0; i < cfg_.n; ++i) {
    decay[i] = std::exp(-im.lambda[i] * cfg_.tau);
  }
  const double sqrt_tau = std::sqrt(cfg_.tau);
  std::vector<double> bare(cfg_.n);
  for (std::size_t mstep = 0; mstep < cfg_.steps; ++mstep) {
    rng::fill_standard_normals(path.with_counter(path.counter + mstep),
                               kSlotStepIncrement, im.xi);
    for (std::size_t i = 0; i < cfg_.n; ++i) {
      bare[i] = im.sqrt_q[i] * (sqrt_tau * im.xi[i]);
    }
    im.advance(cfg_, cfg_.tau, decay, bare.data(), y, mstep);
  }
}

void ExpEulerEngine::run_coupled(const SeedPath& path, std::size_t refinement,
                                 std::vector<double>& coarse,
                                 std::vector<double>& fine) {
  if (refinement < 1) {
    throw std::domain_error("run_coupled: refinement must be >= 1");
  }
  Impl& im = *impl_;
  const std::size_t n = cfg_.n;
  coarse.assign(n, 0.0);
  fine.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    coarse[i] = cfg_.x0[i];
    fine[i] = cfg_.x0[i];
  }

  const double tau_f = cfg_.tau / static_cast<double>(refinement);
  std::vector<double> decay_c(n), decay_f(n);
  for (std::size_t i = 0; i < n; ++i) {
    decay_c[i] = std::exp(-im.lambda[i] * cfg_.tau);
    decay_f[i] = std::exp(-im.lambda[i] * tau_f);
  }
  const double sqrt_tau_f = std::sqrt(tau_f);

  SchemeConfig fine_cfg = cfg_;  // advance() only reads f and derived tables
  std::vector<double> bare_f(n);
  for (std::size_t mstep = 0; mstep < cfg_.steps; ++mstep) {
    std::fill(im.raw_sum.begin(), im.raw_sum.end(), 0.0);
    for (std::size_t j = 0; j < refinement; ++j) {
      const std::uint64_t c =
          path.counter + static_cast<std::uint64_t>(mstep) * refinement + j;
      rng::fill_standard_normals(path.with_counter(c), kSlotStepIncrement, im.xi);
      for (std::size_t i = 0; i < n; ++i) {
        bare_f[i] = im.sqrt_q[i] * (sqrt_tau_f * im.xi[i]);
        im.raw_sum[i] += bare_f[i];
      }
      im.advance(fine_cfg, tau_f, decay_f, bare_f.data(), fine,
                 mstep * refinement + j);
    }
    im.advance(cfg_, cfg_.tau, decay_c, im.raw_sum.data(), coarse, mstep);
  }
}

// ---------------------------------------------------------------------------
// Convenience wrappers

SchemePath integrate(const SchemeConfig& cfg, const SeedPath& path) {
  cfg.validate();
  SchemePath out;
  out.seed_path = path;
  out.states.reserve(cfg.steps + 1);
  out.states.push_back(cfg.x0);

  CollocationGrid grid(cfg.n);
  SpectralVector y = cfg.x0;
  for (std::size_t m = 0; m < cfg.steps; ++m) {
    const NoiseIncrement inc = sample_filtered_increment(
        cfg.cov, cfg.tau, cfg.n, path.with_counter(path.counter + m));
    y = step(cfg, y, inc, grid);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < cfg.n; ++i) max_abs = std::max(max_abs, std::fabs(y[i]));
    if (!(max_abs <= kDivergenceCap)) {
      throw IntegrationError(m, "integrate: path diverged");
    }
    out.states.push_back(y);
  }
  return out;
}

SpectralVector integrate_endpoint(const SchemeConfig& cfg, const SeedPath& path) {
  ExpEulerEngine engine(cfg);
  std::vector<double> out;
  engine.run(path, out);
  return SpectralVector(std::move(out));
}

SpectralVector integrate_reference(const SchemeConfig& cfg, std::size_t refinement,
                                   const SeedPath& path) {
  ExpEulerEngine engine(cfg);
  std::vector<double> coarse, fine;
  engine.run_coupled(path, refinement, coarse, fine);
  return SpectralVector(std::move(fine));
}

CoupledEndpoints integrate_coupled_pair(const SchemeConfig& cfg,
                                        std::size_t refinement,
                                        const SeedPath& path) {
  ExpEulerEngine engine(cfg);
  std::vector<double> coarse, fine;
  engine.run_coupled(path, refinement, coarse, fine);
  return {SpectralVector(std::move(coarse)), SpectralVector(std::move(fine))};
}

namespace {

void require_linear_family(const SchemeConfig& cfg, const char* what) {
  if (!cfg.f.is_diag_linear()) {
    throw std::domain_error(std::string(what) +
                            ": needs the zero or diagonal-linear nonlinearity");
  }
  if (!(cfg.f.linear_rate() < eigenvalue(1))) {
    throw std::domain_error(std::string(what) +
                            ": drift rate must stay below lambda_1");
  }
}

}  // namespace

SpectralVector exact_linear_endpoint(const SchemeConfig& cfg, const SeedPath& path) {
  cfg.validate();
  require_linear_family(cfg, "exact_linear_endpoint");
  const double a = cfg.f.linear_rate();
  SpectralVector out(cfg.n);
  std::vector<double> xi(cfg.n);
  rng::fill_standard_normals(path, kSlotStationary, xi);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double lam = eigenvalue(i + 1);
    const double rate = lam - a;
    const double var = cfg.cov.q(i + 1) * (-std::expm1(-2.0 * rate * cfg.T)) /
                       (2.0 * rate);
    out[i] = std::exp(-rate * cfg.T) * cfg.x0[i] + std::sqrt(var) * xi[i];
  }
  return out;
}

GaussianState scheme_state_law(const SchemeConfig& cfg, std::size_t m) {
  cfg.validate();
  require_linear_family(cfg, "scheme_state_law");
  if (m > cfg.steps) {
    throw std::domain_error("scheme_state_law: step index beyond the mesh");
  }
  const double a = cfg.f.linear_rate();
  GaussianState law;
  law.mean.resize(cfg.n);
  law.var.resize(cfg.n);
  const double dm = static_cast<double>(m);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double lam = eigenvalue(i + 1);
    // rho = e^{-lambda tau} (1 + a tau) < 1; work with log rho for stability
    // at very small tau.
    const double log_rho = -lam * cfg.tau + std::log1p(a * cfg.tau);
    const double step_var =
        cfg.tau * cfg.cov.q(i + 1) * std::exp(-2.0 * lam * cfg.tau);
    law.mean[i] = std::exp(dm * log_rho) * cfg.x0[i];
    if (m == 0) {
      law.var[i] = 0.0;
    } else {
      law.var[i] =
          step_var * (-std::expm1(2.0 * dm * log_rho)) / (-std::expm1(2.0 * log_rho));
    }
  }
  return law;
}

GaussianState scheme_endpoint_law(const SchemeConfig& cfg) {
  return scheme_state_law(cfg, cfg.steps);
}

}  // namespace sgee
