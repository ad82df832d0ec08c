// Hot pointwise loops of the pseudo-spectral nonlinearity.  Compiled with
// relaxed FP rules so the trig calls vectorise; everything here is plain
// elementwise arithmetic with no reductions.

#include "nemytskij_internal.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace sgee::detail {

namespace {
constexpr double kPi = std::numbers::pi;
}

void apply_f(NemytskijSpec::Kind kind, double a, const double* nodes,
             const double* u, double* out, std::size_t m) {
  switch (kind) {
    case NemytskijSpec::Kind::zero:
      std::memset(out, 0, m * sizeof(double));
      return;
    case NemytskijSpec::Kind::diag_linear:
      for (std::size_t j = 0; j < m; ++j) out[j] = a * u[j];
      return;
    case NemytskijSpec::Kind::sine:
      for (std::size_t j = 0; j < m; ++j) out[j] = a * std::sin(u[j]);
      return;
    case NemytskijSpec::Kind::rational:
      for (std::size_t j = 0; j < m; ++j) out[j] = a * u[j] / (1.0 + u[j] * u[j]);
      return;
    case NemytskijSpec::Kind::sine_forced:
      for (std::size_t j = 0; j < m; ++j)
        out[j] = a * std::sin(u[j]) + std::sin(kPi * nodes[j]);
      return;
    case NemytskijSpec::Kind::custom:
      break;  // caller dispatches through the stored callables
  }
}

void apply_df(NemytskijSpec::Kind kind, double a, const double* /*nodes*/,
              const double* u, const double* w, double* out, std::size_t m) {
  switch (kind) {
    case NemytskijSpec::Kind::zero:
      std::memset(out, 0, m * sizeof(double));
      return;
    case NemytskijSpec::Kind::diag_linear:
      for (std::size_t j = 0; j < m; ++j) out[j] = a * w[j];
      return;
    case NemytskijSpec::Kind::sine:
    case NemytskijSpec::Kind::sine_forced:
      for (std::size_t j = 0; j < m; ++j) out[j] = a * std::cos(u[j]) * w[j];
      return;
    case NemytskijSpec::Kind::rational:
      for (std::size_t j = 0; j < m; ++j) {
        const double z2 = u[j] * u[j];
        const double d = 1.0 + z2;
        out[j] = a * (1.0 - z2) / (d * d) * w[j];
      }
      return;
    case NemytskijSpec::Kind::custom:
      break;
  }
}

void apply_d2f(NemytskijSpec::Kind kind, double a, const double* /*nodes*/,
               const double* u, const double* w1, const double* w2, double* out,
               std::size_t m) {
  switch (kind) {
    case NemytskijSpec::Kind::zero:
    case NemytskijSpec::Kind::diag_linear:
      std::memset(out, 0, m * sizeof(double));
      return;
    case NemytskijSpec::Kind::sine:
    case NemytskijSpec::Kind::sine_forced:
      for (std::size_t j = 0; j < m; ++j)
        out[j] = -a * std::sin(u[j]) * w1[j] * w2[j];
      return;
    case NemytskijSpec::Kind::rational:
      for (std::size_t j = 0; j < m; ++j) {
        const double z = u[j];
        const double d = 1.0 + z * z;
        out[j] = a * 2.0 * z * (z * z - 3.0) / (d * d * d) * w1[j] * w2[j];
      }
      return;
    case NemytskijSpec::Kind::custom:
      break;
  }
}

}  // namespace sgee::detail
