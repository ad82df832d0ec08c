#include "sgee/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgee {

namespace {

void check_finite_weights(const std::vector<double>& g, const char* what) {
  for (double x : g) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string(what) + ": non-finite weight");
    }
  }
}

// e^{(a - lambda_k) t}
inline double mean_decay(double a, double lam, double t) {
  return std::exp((a - lam) * t);
}

// q_k (1 - e^{-2 (lambda_k - a) t}) / (2 (lambda_k - a))
inline double ou_variance(double q, double a, double lam, double t) {
  const double rate = lam - a;
  return q * (-std::expm1(-2.0 * rate * t)) / (2.0 * rate);
}

}  // namespace

TestFunctional TestFunctional::cosine(std::vector<double> g) {
  check_finite_weights(g, "TestFunctional::cosine");
  TestFunctional f;
  f.kind = Kind::cosine;
  f.g = std::move(g);
  return f;
}

TestFunctional TestFunctional::linear(std::vector<double> g) {
  check_finite_weights(g, "TestFunctional::linear");
  TestFunctional f;
  f.kind = Kind::linear;
  f.g = std::move(g);
  return f;
}

TestFunctional TestFunctional::quadratic_diag(std::vector<double> w) {
  check_finite_weights(w, "TestFunctional::quadratic_diag");
  TestFunctional f;
  f.kind = Kind::quadratic_diag;
  f.g = std::move(w);
  return f;
}

double evaluate(const TestFunctional& phi, const SpectralVector& x) {
  if (x.dim() != phi.dim()) {
    throw std::domain_error("TestFunctional: dimension mismatch");
  }
  switch (phi.kind) {
    case TestFunctional::Kind::cosine: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.dim(); ++i) dot += x[i] * phi.g[i];
      return std::cos(dot);
    }
    case TestFunctional::Kind::linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.dim(); ++i) dot += x[i] * phi.g[i];
      return dot;
    }
    case TestFunctional::Kind::quadratic_diag: {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.dim(); ++i) sum += phi.g[i] * x[i] * x[i];
      return sum;
    }
  }
  return 0.0;
}

double expectation(const TestFunctional& phi, const GaussianState& law) {
  if (law.dim() != phi.dim()) {
    throw std::domain_error("expectation: dimension mismatch");
  }
  switch (phi.kind) {
    case TestFunctional::Kind::cosine: {
      double dot = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < law.dim(); ++i) {
        dot += law.mean[i] * phi.g[i];
        quad += phi.g[i] * phi.g[i] * law.var[i];
      }
      return std::cos(dot) * std::exp(-0.5 * quad);
    }
    case TestFunctional::Kind::linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < law.dim(); ++i) dot += law.mean[i] * phi.g[i];
      return dot;
    }
    case TestFunctional::Kind::quadratic_diag: {
      double sum = 0.0;
      for (std::size_t i = 0; i < law.dim(); ++i) {
        sum += phi.g[i] * (law.mean[i] * law.mean[i] + law.var[i]);
      }
      return sum;
    }
  }
  return 0.0;
}

void KolmogorovField::validate() const {
  if (n < 1) {
    throw std::domain_error("KolmogorovField: n must be >= 1");
  }
  if (functional.dim() != n) {
    throw std::domain_error("KolmogorovField: functional dimension mismatch");
  }
  if (!(drift_rate < eigenvalue(1))) {
    throw std::domain_error(
        "KolmogorovField: drift rate must stay below lambda_1 (dissipativity)");
  }
}

GaussianState propagate_law(const KolmogorovField& field, double t,
                            const SpectralVector& x) {
  field.validate();
  require_finite(x, "propagate_law");
  if (!(t >= 0.0)) {
    throw std::domain_error("propagate_law: t must be >= 0");
  }
  if (x.dim() != field.n) {
    throw std::domain_error("propagate_law: state dimension mismatch");
  }
  GaussianState law;
  law.mean.resize(field.n);
  law.var.resize(field.n);
  for (std::size_t i = 0; i < field.n; ++i) {
    const double lam = eigenvalue(i + 1);
    law.mean[i] = mean_decay(field.drift_rate, lam, t) * x[i];
    law.var[i] = ou_variance(field.cov.q(i + 1), field.drift_rate, lam, t);
  }
  return law;
}

double mu(const KolmogorovField& field, double t, const SpectralVector& x) {
  return expectation(field.functional, propagate_law(field, t, x));
}

SpectralVector grad_mu(const KolmogorovField& field, double t,
                       const SpectralVector& x) {
  const GaussianState law = propagate_law(field, t, x);
  SpectralVector out(field.n);
  switch (field.functional.kind) {
    case TestFunctional::Kind::cosine: {
      double dot = 0.0, quad = 0.0;
      for (std::size_t i = 0; i < field.n; ++i) {
        dot += law.mean[i] * field.functional.g[i];
        quad += field.functional.g[i] * field.functional.g[i] * law.var[i];
      }
      const double factor = -std::sin(dot) * std::exp(-0.5 * quad);
      for (std::size_t i = 0; i < field.n; ++i) {
        out[i] = factor * field.functional.g[i] *
                 mean_decay(field.drift_rate, eigenvalue(i + 1), t);
      }
      return out;
    }
    case TestFunctional::Kind::linear: {
      for (std::size_t i = 0; i < field.n; ++i) {
        out[i] = field.functional.g[i] *
                 mean_decay(field.drift_rate, eigenvalue(i + 1), t);
      }
      return out;
    }
    case TestFunctional::Kind::quadratic_diag: {
      for (std::size_t i = 0; i < field.n; ++i) {
        out[i] = 2.0 * field.functional.g[i] * law.mean[i] *
                 mean_decay(field.drift_rate, eigenvalue(i + 1), t);
      }
      return out;
    }
  }
  return out;
}

double hess_mu_quadratic_form(const KolmogorovField& field, double t,
                              const SpectralVector& x, const SpectralVector& w1,
                              const SpectralVector& w2) {
  if (w1.dim() != field.n || w2.dim() != field.n) {
    throw std::domain_error("hess_mu_quadratic_form: direction dimension mismatch");
  }
  const GaussianState law = propagate_law(field, t, x);
  switch (field.functional.kind) {
    case TestFunctional::Kind::cosine: {
      double dot = 0.0, quad = 0.0, p1 = 0.0, p2 = 0.0;
      for (std::size_t i = 0; i < field.n; ++i) {
        const double gdecay = field.functional.g[i] *
                              mean_decay(field.drift_rate, eigenvalue(i + 1), t);
        dot += law.mean[i] * field.functional.g[i];
        quad += field.functional.g[i] * field.functional.g[i] * law.var[i];
        p1 += w1[i] * gdecay;
        p2 += w2[i] * gdecay;
      }
      return -std::cos(dot) * std::exp(-0.5 * quad) * p1 * p2;
    }
    case TestFunctional::Kind::linear:
      return 0.0;
    case TestFunctional::Kind::quadratic_diag: {
      double sum = 0.0;
      for (std::size_t i = 0; i < field.n; ++i) {
        const double d = mean_decay(field.drift_rate, eigenvalue(i + 1), t);
        sum += 2.0 * field.functional.g[i] * d * d * w1[i] * w2[i];
      }
      return sum;
    }
  }
  return 0.0;
}

double hess_mu_diag_trace(const KolmogorovField& field, double t,
                          const SpectralVector& x,
                          const std::vector<double>& weights) {
  if (weights.size() != field.n) {
    throw std::domain_error("hess_mu_diag_trace: weight dimension mismatch");
  }
  const GaussianState law = propagate_law(field, t, x);
  switch (field.functional.kind) {
    case TestFunctional::Kind::cosine: {
      double dot = 0.0, quad = 0.0, tr = 0.0;
      for (std::size_t i = 0; i < field.n; ++i) {
        const double gdecay = field.functional.g[i] *
                              mean_decay(field.drift_rate, eigenvalue(i + 1), t);
        dot += law.mean[i] * field.functional.g[i];
        quad += field.functional.g[i] * field.functional.g[i] * law.var[i];
        tr += weights[i] * gdecay * gdecay;
      }
      return -std::cos(dot) * std::exp(-0.5 * quad) * tr;
    }
    case TestFunctional::Kind::linear:
      return 0.0;
    case TestFunctional::Kind::quadratic_diag: {
      double tr = 0.0;
      for (std::size_t i = 0; i < field.n; ++i) {
        const double d = mean_decay(field.drift_rate, eigenvalue(i + 1), t);
        tr += weights[i] * 2.0 * field.functional.g[i] * d * d;
      }
      return tr;
    }
  }
  return 0.0;
}

double nu(const KolmogorovField& field, double t, const SpectralVector& y) {
  return mu(field, t, apply_semigroup_inverse(y, t));
}

SpectralVector grad_nu(const KolmogorovField& field, double t,
                       const SpectralVector& y) {
  const SpectralVector x = apply_semigroup_inverse(y, t);
  SpectralVector g = grad_mu(field, t, x);
  for (std::size_t i = 0; i < g.dim(); ++i) {
    g[i] *= std::exp(eigenvalue(i + 1) * t);
  }
  return g;
}

double hess_nu_quadratic_form(const KolmogorovField& field, double t,
                              const SpectralVector& y, const SpectralVector& z1,
                              const SpectralVector& z2) {
  const SpectralVector x = apply_semigroup_inverse(y, t);
  return hess_mu_quadratic_form(field, t, x, apply_semigroup_inverse(z1, t),
                                apply_semigroup_inverse(z2, t));
}

namespace {

// Five-point central difference in t; the probe time must admit t - 2h >= 0.
template <typename F>
double time_derivative(F&& f, double t) {
  const double h = 1e-4 * std::max(1.0, t);
  if (t - 2.0 * h < 0.0) {
    throw std::domain_error("time_derivative: FD stencil leaves [0, T]");
  }
  return (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) /
         (12.0 * h);
}

}  // namespace

double kolmogorov_residual(const KolmogorovField& field, double t,
                           const SpectralVector& x) {
  if (!(t > 0.0)) {
    throw std::domain_error("kolmogorov_residual: t must be > 0");
  }
  const double dmu_dt =
      time_derivative([&](double s) { return mu(field, s, x); }, t);

  const SpectralVector grad = grad_mu(field, t, x);
  double drift = 0.0;
  for (std::size_t i = 0; i < field.n; ++i) {
    drift += (field.drift_rate - eigenvalue(i + 1)) * x[i] * grad[i];
  }
  std::vector<double> qdiag(field.n);
  for (std::size_t i = 0; i < field.n; ++i) qdiag[i] = field.cov.q(i + 1);
  const double trace = hess_mu_diag_trace(field, t, x, qdiag);

  return dmu_dt - drift - 0.5 * trace;
}

double nu_residual(const KolmogorovField& field, double t, const SpectralVector& y) {
  if (!(t > 0.0)) {
    throw std::domain_error("nu_residual: t must be > 0");
  }
  const double dnu_dt =
      time_derivative([&](double s) { return nu(field, s, y); }, t);

  // E(t) F(E(-t) y) = a y for the diagonal-linear drift.
  const SpectralVector grad = grad_nu(field, t, y);
  double drift = 0.0;
  for (std::size_t i = 0; i < field.n; ++i) {
    drift += field.drift_rate * y[i] * grad[i];
  }

  // Tr[D^2 nu (E(t)B)(E(t)B)^*]: the e^{+2 lambda t} of D^2 nu cancels the
  // e^{-2 lambda t} of the filtered covariance, leaving q_k D^2 mu[e_k,e_k]
  // at the transformed point.
  const SpectralVector x = apply_semigroup_inverse(y, t);
  std::vector<double> qdiag(field.n);
  for (std::size_t i = 0; i < field.n; ++i) qdiag[i] = field.cov.q(i + 1);
  const double trace = hess_mu_diag_trace(field, t, x, qdiag);

  return dnu_dt - drift - 0.5 * trace;
}

}  // namespace sgee
