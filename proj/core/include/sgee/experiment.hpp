#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgee/error_representation.hpp"
#include "sgee/exp_euler.hpp"
#include "sgee/kolmogorov.hpp"
#include "sgee/nemytskij.hpp"
#include "sgee/rate_fit.hpp"

namespace sgee {

/// Functional description as it appears in config files; build() realises
/// it at a concrete truncation level (sparse modes are zero-padded, the
/// dense power family is g_k = scale * k^exponent for every resolved mode).
struct FunctionalSpec {
  TestFunctional::Kind kind = TestFunctional::Kind::cosine;
  std::vector<std::pair<std::size_t, double>> modes;  // sparse (k, weight)
  bool dense = false;
  double exponent = 0.0;
  double scale = 1.0;

  TestFunctional build(std::size_t n) const;
};

/// Initial datum description; power means x0_k = scale * k^{-p}.
struct InitialSpec {
  enum class Kind { zero, power, modes };
  Kind kind = Kind::power;
  double p = 2.5;
  double scale = 1.0;
  std::vector<std::pair<std::size_t, double>> mode_list;

  SpectralVector build(std::size_t n) const;
};

/// Optional pass/fail targets; absent entries are not enforced.
struct Tolerances {
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  std::optional<double> r2_min;
  std::optional<double> residual_abs;
  std::optional<double> stderr_mult;
  std::optional<double> h1_slope_min;
  std::optional<double> increment_slope_min;
  std::optional<double> sup_ratio_max;
  std::optional<double> ratio_bound;
};

struct ExperimentPlan {
  enum class Kind {
    weak_rate_time,
    weak_rate_spatial,
    representation_check,
    moment_diagnostics,
    assumption_check,
    simulate,
  };

  Kind kind = Kind::weak_rate_time;
  std::size_t n = 512;
  double T = 1.0;
  std::vector<double> tau_sweep;
  std::vector<std::size_t> N_sweep;
  std::size_t N_ref = 0;
  double tau = 0.0;        // fixed step (spatial / representation / simulate)
  std::size_t steps = 0;   // alternative to tau
  CovarianceSpec cov;
  NemytskijSpec f;
  FunctionalSpec functional;
  InitialSpec x0;
  std::size_t mc_samples = 20000;
  std::size_t refinement = 64;
  std::size_t quadrature_nodes = 8;
  std::size_t check_samples = 1000;  // assumption_check probes
  double gamma = 0.2;                // fractional exponent for diagnostics
  Tolerances tol;
  std::uint64_t seed = 0;

  std::string raw_json;  // canonical config echo, hashed into outputs
};

/// Parses the JSON document described in the README (throws
/// std::invalid_argument with a descriptive message on malformed input).
ExperimentPlan parse_plan_json(const std::string& text);
ExperimentPlan load_plan(const std::string& path);

struct RunContext {
  std::uint64_t seed = 0;       // overrides the plan seed when set_seed
  bool seed_overridden = false;
  int threads = 1;
  std::string out_prefix;       // empty: no files written
};

struct ExperimentOutcome {
  bool pass = true;
  std::string summary_json;   // what was (or would be) written
  std::string csv;            // rate/diagnostic table when applicable
  RateFit fit;                // valid for rate experiments
  RepresentationReport representation;  // valid for representation_check
};

ExperimentOutcome run_weak_rate_time(const ExperimentPlan& plan, const RunContext& ctx);
ExperimentOutcome run_weak_rate_spatial(const ExperimentPlan& plan,
                                        const RunContext& ctx);
ExperimentOutcome run_representation_check(const ExperimentPlan& plan,
                                           const RunContext& ctx);
ExperimentOutcome run_moment_diagnostics(const ExperimentPlan& plan,
                                         const RunContext& ctx);
ExperimentOutcome run_assumption_check(const ExperimentPlan& plan,
                                       const RunContext& ctx);
ExperimentOutcome run_simulate(const ExperimentPlan& plan, const RunContext& ctx);

/// Dispatch on plan.kind; writes <prefix>.csv / <prefix>.summary.json /
/// <prefix>.report.json as applicable.
ExperimentOutcome run_experiment(const ExperimentPlan& plan, const RunContext& ctx);

/// Build identification compiled into the library.
const char* build_describe();

/// FNV-1a hash of the canonical config text, printed into every output.
std::uint64_t config_hash(const std::string& canonical_json);

}  // namespace sgee
