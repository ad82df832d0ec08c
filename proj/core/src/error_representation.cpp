#include "sgee/error_representation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgee/quadrature.hpp"
#include "sgee/stats.hpp"

namespace sgee {

namespace {

KolmogorovField field_for(const SchemeConfig& cfg, const TestFunctional& phi,
                          const char* what) {
  if (!cfg.f.is_diag_linear()) {
    throw std::domain_error(std::string(what) +
                            ": closed forms need the diagonal-linear family");
  }
  KolmogorovField field;
  field.drift_rate = cfg.f.linear_rate();
  field.cov = cfg.cov;
  field.functional = phi;
  field.n = cfg.n;
  field.validate();
  return field;
}

// Per-mode law of Y~(t_m + s) given the closed-form law of Y_m
// (diagonal-linear family).
struct ExtensionLaw {
  std::vector<double> mean;
  std::vector<double> var;
};

ExtensionLaw extension_law(const SchemeConfig& cfg, const GaussianState& state_m,
                           double s) {
  const double a = cfg.f.linear_rate();
  const std::size_t n = cfg.n;
  ExtensionLaw law;
  law.mean.resize(n);
  law.var.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = eigenvalue(i + 1);
    const double decay = std::exp(-lam * s);
    const double growth = 1.0 + a * s;
    law.mean[i] = decay * growth * state_m.mean[i];
    law.var[i] = decay * decay *
                 (growth * growth * state_m.var[i] + s * cfg.cov.q(i + 1));
  }
  return law;
}

// Closed-form integrand of the trace summand at t = t_m + s:
//   1/2 E[ sum_k q_k (e^{-2 lambda_k s} - 1) D2mu(T-t, Y~)[e_k, e_k] ].
double trace_integrand_closed(const SchemeConfig& cfg, const KolmogorovField& field,
                              const GaussianState& state_m, double s,
                              double time_to_go) {
  const double a = field.drift_rate;
  const std::size_t n = cfg.n;
  const TestFunctional& phi = field.functional;
  switch (phi.kind) {
    case TestFunctional::Kind::linear:
      return 0.0;
    case TestFunctional::Kind::quadratic_diag: {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = eigenvalue(i + 1);
        const double gap = cfg.cov.q(i + 1) * std::expm1(-2.0 * lam * s);
        const double d = std::exp((a - lam) * time_to_go);
        sum += gap * 2.0 * phi.g[i] * d * d;
      }
      return 0.5 * sum;
    }
    case TestFunctional::Kind::cosine: {
      const ExtensionLaw ext = extension_law(cfg, state_m, s);
      // g~_k = g_k e^{(a-lambda_k)(T-t)}; C is the remaining-noise factor
      // of mu at horizon T-t.
      double es = 0.0, var_s = 0.0, c_quad = 0.0, weighted = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = eigenvalue(i + 1);
        const double gt = phi.g[i] * std::exp((a - lam) * time_to_go);
        es += gt * ext.mean[i];
        var_s += gt * gt * ext.var[i];
        const double rate = lam - a;
        c_quad += phi.g[i] * phi.g[i] * cfg.cov.q(i + 1) *
                  (-std::expm1(-2.0 * rate * time_to_go)) / (2.0 * rate);
        const double gap = cfg.cov.q(i + 1) * std::expm1(-2.0 * lam * s);
        weighted += gap * gt * gt;
      }
      const double smear = std::cos(es) * std::exp(-0.5 * var_s);
      const double c_factor = std::exp(-0.5 * c_quad);
      return 0.5 * (-smear * c_factor) * weighted;
    }
  }
  return 0.0;
}

// Closed-form integrand of the drift summand at t = t_m + s for f = a z:
//   E[ < Dmu(T-t, Y~), a (E(s) Y_m - Y~) > ].
double drift_integrand_closed(const SchemeConfig& cfg, const KolmogorovField& field,
                              const GaussianState& state_m, double s,
                              double time_to_go) {
  const double a = field.drift_rate;
  if (a == 0.0) return 0.0;
  const std::size_t n = cfg.n;
  const TestFunctional& phi = field.functional;
  switch (phi.kind) {
    case TestFunctional::Kind::linear: {
      // Dmu is constant; only the mean of a(E(s)Y_m - Y~) survives.
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = eigenvalue(i + 1);
        const double gt = phi.g[i] * std::exp((a - lam) * time_to_go);
        sum += gt * std::exp(-lam * s) * a * s * state_m.mean[i];
      }
      return -a * sum;
    }
    case TestFunctional::Kind::quadratic_diag: {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = eigenvalue(i + 1);
        const double d = std::exp((a - lam) * time_to_go);
        const double decay = std::exp(-lam * s);
        const double growth = 1.0 + a * s;
        const double second_moment =
            state_m.var[i] + state_m.mean[i] * state_m.mean[i];
        const double exy = decay * (a * s * growth * second_moment +
                                    s * cfg.cov.q(i + 1));
        sum += 2.0 * phi.g[i] * d * d * decay * exy;
      }
      return -a * sum;
    }
    case TestFunctional::Kind::cosine: {
      // < Dmu(T-t, Y~), a(E(s)Y_m - Y~) > = a C sin(S) L with
      //   S = <Y~, g~>,  L = sum_k g~_k e^{-lambda_k s}(a s Y_{m,k} + bare_k),
      // and E[sin(S) L] = e^{-Var S/2}(sin(ES) EL + cos(ES) Cov(S, L)).
      const ExtensionLaw ext = extension_law(cfg, state_m, s);
      double es = 0.0, var_s = 0.0, c_quad = 0.0, el = 0.0, cov_sl = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double lam = eigenvalue(i + 1);
        const double gt = phi.g[i] * std::exp((a - lam) * time_to_go);
        const double decay = std::exp(-lam * s);
        const double growth = 1.0 + a * s;
        es += gt * ext.mean[i];
        var_s += gt * gt * ext.var[i];
        const double rate = lam - a;
        c_quad += phi.g[i] * phi.g[i] * cfg.cov.q(i + 1) *
                  (-std::expm1(-2.0 * rate * time_to_go)) / (2.0 * rate);
        el += gt * decay * a * s * state_m.mean[i];
        cov_sl += gt * gt * decay * decay *
                  (growth * a * s * state_m.var[i] + s * cfg.cov.q(i + 1));
      }
      const double c_factor = std::exp(-0.5 * c_quad);
      const double esl = std::exp(-0.5 * var_s) *
                         (std::sin(es) * el + std::cos(es) * cov_sl);
      return a * c_factor * esl;
    }
  }
  return 0.0;
}

enum class Summand { drift, trace };

double closed_form_sum(const SchemeConfig& cfg, const TestFunctional& phi,
                       std::size_t quad_nodes, Summand which) {
  const KolmogorovField field = field_for(cfg, phi, "representation closed form");
  const GaussLegendre gl(quad_nodes);
  double total = 0.0;
  for (std::size_t m = 0; m < cfg.steps; ++m) {
    const GaussianState state_m = scheme_state_law(cfg, m);
    const double t_m = cfg.tau * static_cast<double>(m);
    total += gl.integrate(
        [&](double s) {
          const double time_to_go = cfg.T - (t_m + s);
          return which == Summand::drift
                     ? drift_integrand_closed(cfg, field, state_m, s, time_to_go)
                     : trace_integrand_closed(cfg, field, state_m, s, time_to_go);
        },
        0.0, cfg.tau);
  }
  return total;
}

// Monte Carlo evaluation of one or both summands over full scheme paths.
struct McSummands {
  ValueWithError drift;
  ValueWithError trace;
};

McSummands mc_summands(const SchemeConfig& cfg, const GradMuFn* grad,
                       const HessTraceFn* hess, std::size_t quad_nodes,
                       std::size_t samples, const SeedPath& base) {
  const GaussLegendre gl(quad_nodes);
  CollocationGrid grid(cfg.n);
  MeanAccumulator acc_drift, acc_trace;

  std::vector<double> s_nodes(quad_nodes), s_weights(quad_nodes);
  std::vector<std::vector<double>> gap_weights(quad_nodes,
                                               std::vector<double>(cfg.n));
  for (std::size_t j = 0; j < quad_nodes; ++j) {
    s_nodes[j] = 0.5 * cfg.tau * (1.0 + gl.nodes[j]);
    s_weights[j] = 0.5 * cfg.tau * gl.weights[j];
    for (std::size_t i = 0; i < cfg.n; ++i) {
      gap_weights[j][i] =
          cfg.cov.q(i + 1) * std::expm1(-2.0 * eigenvalue(i + 1) * s_nodes[j]);
    }
  }

  for (std::size_t sample = 0; sample < samples; ++sample) {
    const SeedPath path = base.with_stream(base.stream + sample);
    SpectralVector y = cfg.x0;
    double drift_sum = 0.0;
    double trace_sum = 0.0;
    for (std::size_t m = 0; m < cfg.steps; ++m) {
      const SeedPath step_path = path.with_counter(path.counter + m);
      const double t_m = cfg.tau * static_cast<double>(m);
      const SpectralVector Fy =
          grad != nullptr ? evaluate_F(cfg.f, y, grid) : SpectralVector(cfg.n);

      for (std::size_t j = 0; j < quad_nodes; ++j) {
        const double s = s_nodes[j];
        const auto [to_s, rest] =
            sample_subinterval_pair(cfg.cov, cfg.tau, s, cfg.n, step_path);
        const SpectralVector y_tilde = continuous_extension(cfg, y, s, to_s, grid);
        const double time_to_go = cfg.T - (t_m + s);

        if (grad != nullptr) {
          const SpectralVector g = (*grad)(time_to_go, y_tilde);
          const SpectralVector Fy_tilde = evaluate_F(cfg.f, y_tilde, grid);
          double dot = 0.0;
          for (std::size_t i = 0; i < cfg.n; ++i) {
            const double gap =
                std::exp(-eigenvalue(i + 1) * s) * Fy[i] - Fy_tilde[i];
            dot += g[i] * gap;
          }
          drift_sum += s_weights[j] * dot;
        }
        if (hess != nullptr) {
          trace_sum +=
              s_weights[j] * 0.5 * (*hess)(time_to_go, y_tilde, gap_weights[j]);
        }
      }

      const NoiseIncrement inc =
          sample_filtered_increment(cfg.cov, cfg.tau, cfg.n, step_path);
      y = step(cfg, y, inc, grid);
    }
    if (grad != nullptr) acc_drift.add(drift_sum);
    if (hess != nullptr) acc_trace.add(trace_sum);
  }

  McSummands out;
  out.drift = {acc_drift.mean(), acc_drift.stderr_of_mean()};
  out.trace = {acc_trace.mean(), acc_trace.stderr_of_mean()};
  return out;
}

}  // namespace

GradMuFn closed_form_grad(const KolmogorovField& field) {
  return [field](double time_to_go, const SpectralVector& y) {
    return grad_mu(field, time_to_go, y);
  };
}

GradMuFn mc_fd_grad(const SchemeConfig& cfg, const TestFunctional& phi,
                    const McGradOptions& opts, const SeedPath& path) {
  SchemeConfig base = cfg;
  return [base, phi, opts, path](double time_to_go,
                                 const SpectralVector& y) -> SpectralVector {
    SpectralVector out(base.n);
    if (time_to_go <= 0.0) {
      // Dmu(0, y) = DPhi(y): differentiate the functional directly.
      const double h = opts.h;
      for (std::size_t k = 0; k < base.n; ++k) {
        SpectralVector yp = y, ym = y;
        yp[k] += h;
        ym[k] -= h;
        out[k] = (evaluate(phi, yp) - evaluate(phi, ym)) / (2.0 * h);
      }
      return out;
    }
    const std::size_t coarse_steps = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(time_to_go / base.tau)));
    const std::size_t inner_steps = coarse_steps * opts.refinement;
    SchemeConfig inner = base;
    inner.T = time_to_go;
    inner.steps = inner_steps;
    inner.tau = time_to_go / static_cast<double>(inner_steps);
    std::vector<double> up, um;
    for (std::size_t k = 0; k < base.n; ++k) {
      SpectralVector yp = y, ym = y;
      yp[k] += opts.h;
      ym[k] -= opts.h;
      inner.x0 = yp;
      ExpEulerEngine plus(inner);
      inner.x0 = ym;
      ExpEulerEngine minus(inner);
      MeanAccumulator diff;
      for (std::size_t s = 0; s < opts.samples; ++s) {
        // Common random numbers: the same stream drives both offsets.
        const SeedPath p{path.seed, path.stream + 7919 * (s + 1), path.counter};
        plus.run(p, up);
        minus.run(p, um);
        diff.add((evaluate(phi, SpectralVector(up)) -
                  evaluate(phi, SpectralVector(um))) /
                 (2.0 * opts.h));
      }
      out[k] = diff.mean();
    }
    return out;
  };
}

ValueWithError lhs_weak_error(const SchemeConfig& cfg, const TestFunctional& phi,
                              const LhsOptions& opts, const SeedPath& path) {
  cfg.validate();
  if (phi.dim() != cfg.n) {
    throw std::domain_error("lhs_weak_error: functional dimension mismatch");
  }
  if (opts.samples == 0) {
    const KolmogorovField field = field_for(cfg, phi, "lhs_weak_error");
    const GaussianState scheme = scheme_endpoint_law(cfg);
    const GaussianState exact = propagate_law(field, cfg.T, cfg.x0);
    return {expectation(phi, scheme) - expectation(phi, exact), 0.0};
  }
  if (cfg.f.is_diag_linear()) {
    ExpEulerEngine engine(cfg);
    MeanAccumulator scheme_acc, exact_acc;
    std::vector<double> buf;
    for (std::size_t s = 0; s < opts.samples; ++s) {
      const SeedPath p = path.with_stream(path.stream + s);
      engine.run(p, buf);
      scheme_acc.add(evaluate(phi, SpectralVector(buf)));
      exact_acc.add(evaluate(phi, exact_linear_endpoint(cfg, p)));
    }
    const double se = std::sqrt(scheme_acc.stderr_of_mean() * scheme_acc.stderr_of_mean() +
                                exact_acc.stderr_of_mean() * exact_acc.stderr_of_mean());
    return {scheme_acc.mean() - exact_acc.mean(), se};
  }
  // Nonlinear drift: coupled self-convergence against the refined path.
  ExpEulerEngine engine(cfg);
  MeanAccumulator acc;
  std::vector<double> coarse, fine;
  for (std::size_t s = 0; s < opts.samples; ++s) {
    engine.run_coupled(path.with_stream(path.stream + s), opts.refinement, coarse,
                       fine);
    acc.add(evaluate(phi, SpectralVector(coarse)) -
            evaluate(phi, SpectralVector(fine)));
  }
  return {acc.mean(), acc.stderr_of_mean()};
}

ValueWithError rhs_drift_term(const SchemeConfig& cfg, const TestFunctional& phi,
                              std::size_t quadrature_nodes, std::size_t mc_samples,
                              const SeedPath& path) {
  cfg.validate();
  if (cfg.f.is_zero()) return {0.0, 0.0};
  if (mc_samples == 0) {
    return {closed_form_sum(cfg, phi, quadrature_nodes, Summand::drift), 0.0};
  }
  const KolmogorovField field = field_for(cfg, phi, "rhs_drift_term");
  const GradMuFn grad = closed_form_grad(field);
  return mc_summands(cfg, &grad, nullptr, quadrature_nodes, mc_samples, path).drift;
}

ValueWithError rhs_drift_term_with_grad(const SchemeConfig& cfg,
                                        const GradMuFn& grad,
                                        std::size_t quadrature_nodes,
                                        std::size_t mc_samples,
                                        const SeedPath& path) {
  cfg.validate();
  if (cfg.f.is_zero()) return {0.0, 0.0};
  if (mc_samples == 0) {
    throw std::domain_error("rhs_drift_term_with_grad: oracle route needs samples");
  }
  return mc_summands(cfg, &grad, nullptr, quadrature_nodes, mc_samples, path).drift;
}

ValueWithError rhs_trace_term(const SchemeConfig& cfg, const TestFunctional& phi,
                              std::size_t quadrature_nodes, std::size_t mc_samples,
                              const SeedPath& path) {
  cfg.validate();
  if (mc_samples == 0) {
    return {closed_form_sum(cfg, phi, quadrature_nodes, Summand::trace), 0.0};
  }
  const KolmogorovField field = field_for(cfg, phi, "rhs_trace_term");
  const HessTraceFn hess = [field](double time_to_go, const SpectralVector& y,
                                   const std::vector<double>& weights) {
    return hess_mu_diag_trace(field, time_to_go, y, weights);
  };
  return mc_summands(cfg, nullptr, &hess, quadrature_nodes, mc_samples, path).trace;
}

ValueWithError rhs_trace_term_with_hess(const SchemeConfig& cfg,
                                        const HessTraceFn& hess,
                                        std::size_t quadrature_nodes,
                                        std::size_t mc_samples,
                                        const SeedPath& path) {
  cfg.validate();
  if (mc_samples == 0) {
    throw std::domain_error("rhs_trace_term_with_hess: oracle route needs samples");
  }
  return mc_summands(cfg, nullptr, &hess, quadrature_nodes, mc_samples, path).trace;
}

RepresentationReport verify_representation(const SchemeConfig& cfg,
                                           const TestFunctional& phi,
                                           const RepresentationOptions& opts) {
  cfg.validate();
  RepresentationReport rep;
  rep.quadrature_nodes = opts.quadrature_nodes;
  rep.mc_samples = opts.mc_samples;

  rep.lhs = lhs_weak_error(cfg, phi, {opts.mc_samples, 64}, opts.path);
  rep.drift_term =
      rhs_drift_term(cfg, phi, opts.quadrature_nodes, opts.mc_samples, opts.path);
  rep.trace_term =
      rhs_trace_term(cfg, phi, opts.quadrature_nodes, opts.mc_samples, opts.path);

  const std::size_t half = std::max<std::size_t>(1, opts.quadrature_nodes / 2);
  const ValueWithError drift_half =
      rhs_drift_term(cfg, phi, half, opts.mc_samples, opts.path);
  const ValueWithError trace_half =
      rhs_trace_term(cfg, phi, half, opts.mc_samples, opts.path);
  rep.quadrature_error =
      std::fabs(rep.drift_term.value + rep.trace_term.value -
                (drift_half.value + trace_half.value));

  rep.residual = rep.lhs.value - (rep.drift_term.value + rep.trace_term.value);
  const double combined_se =
      std::sqrt(rep.lhs.stderr_ * rep.lhs.stderr_ +
                rep.drift_term.stderr_ * rep.drift_term.stderr_ +
                rep.trace_term.stderr_ * rep.trace_term.stderr_);
  if (opts.mc_samples == 0) {
    rep.tolerance = opts.residual_tolerance + rep.quadrature_error;
  } else {
    rep.tolerance = opts.stderr_multiplier * combined_se + rep.quadrature_error;
  }
  rep.pass = std::fabs(rep.residual) <= rep.tolerance;
  return rep;
}

}  // namespace sgee
