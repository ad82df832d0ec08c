#include "sgee/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "sgee/quadrature.hpp"
#include "sgee/stats.hpp"

namespace sgee {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double phi_eval(const TestFunctional& phi, const std::vector<double>& x) {
  return evaluate(phi, SpectralVector(x));
}

}  // namespace

TestFunctional FunctionalSpec::build(std::size_t n) const {
  std::vector<double> g(n, 0.0);
  if (dense) {
    for (std::size_t k = 1; k <= n; ++k) {
      g[k - 1] = scale * std::pow(static_cast<double>(k), exponent);
    }
  } else {
    for (const auto& [k, w] : modes) {
      if (k >= 1 && k <= n) g[k - 1] = w;
    }
  }
  switch (kind) {
    case TestFunctional::Kind::cosine:
      return TestFunctional::cosine(std::move(g));
    case TestFunctional::Kind::linear:
      return TestFunctional::linear(std::move(g));
    case TestFunctional::Kind::quadratic_diag:
      return TestFunctional::quadratic_diag(std::move(g));
  }
  throw std::logic_error("FunctionalSpec: unreachable kind");
}

SpectralVector InitialSpec::build(std::size_t n) const {
  switch (kind) {
    case Kind::zero:
      return SpectralVector(n);
    case Kind::power:
      return power_law_initial(n, p, scale);
    case Kind::modes: {
      SpectralVector v(n);
      for (const auto& [k, val] : mode_list) {
        if (k >= 1 && k <= n) v[k - 1] = val;
      }
      return v;
    }
  }
  throw std::logic_error("InitialSpec: unreachable kind");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

CovarianceSpec parse_covariance(const json& j) {
  const std::string kind = j.value("kind", "white");
  if (kind == "white") return CovarianceSpec::white();
  if (kind == "power_decay") {
    if (!j.contains("r")) {
      throw std::invalid_argument("covariance power_decay requires \"r\"");
    }
    return CovarianceSpec::power_decay(j.at("r").get<double>());
  }
  if (kind == "custom") {
    return CovarianceSpec::custom(j.at("q").get<std::vector<double>>());
  }
  throw std::invalid_argument("unknown covariance kind: " + kind);
}

NemytskijSpec parse_nonlinearity(const json& j) {
  const std::string name = j.value("name", "zero");
  const double scale = j.value("scale", 1.0);
  return nonlinearity::by_name(name, scale);
}

FunctionalSpec parse_functional(const json& j) {
  FunctionalSpec spec;
  const std::string kind = j.value("kind", "cosine");
  if (kind == "cosine") {
    spec.kind = TestFunctional::Kind::cosine;
  } else if (kind == "linear") {
    spec.kind = TestFunctional::Kind::linear;
  } else if (kind == "quadratic_diag") {
    spec.kind = TestFunctional::Kind::quadratic_diag;
  } else {
    throw std::invalid_argument("unknown functional kind: " + kind);
  }
  if (j.contains("g_power")) {
    spec.dense = true;
    spec.exponent = j.at("g_power").value("exponent", 0.0);
    spec.scale = j.at("g_power").value("scale", 1.0);
  } else if (j.contains("g_modes")) {
    for (const auto& entry : j.at("g_modes")) {
      spec.modes.emplace_back(entry.at(0).get<std::size_t>(),
                              entry.at(1).get<double>());
    }
  } else {
    throw std::invalid_argument("functional requires g_modes or g_power");
  }
  return spec;
}

InitialSpec parse_initial(const json& j) {
  InitialSpec spec;
  const std::string kind = j.value("kind", "power");
  if (kind == "zero") {
    spec.kind = InitialSpec::Kind::zero;
  } else if (kind == "power") {
    spec.kind = InitialSpec::Kind::power;
    spec.p = j.value("p", 2.5);
    spec.scale = j.value("scale", 1.0);
  } else if (kind == "modes") {
    spec.kind = InitialSpec::Kind::modes;
    for (const auto& entry : j.at("modes")) {
      spec.mode_list.emplace_back(entry.at(0).get<std::size_t>(),
                                  entry.at(1).get<double>());
    }
  } else {
    throw std::invalid_argument("unknown x0 kind: " + kind);
  }
  return spec;
}

Tolerances parse_tolerances(const json& j) {
  Tolerances tol;
  auto grab = [&](const char* key, std::optional<double>& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  grab("slope_min", tol.slope_min);
  grab("slope_max", tol.slope_max);
  grab("r2_min", tol.r2_min);
  grab("residual_abs", tol.residual_abs);
  grab("stderr_mult", tol.stderr_mult);
  grab("h1_slope_min", tol.h1_slope_min);
  grab("increment_slope_min", tol.increment_slope_min);
  grab("sup_ratio_max", tol.sup_ratio_max);
  grab("ratio_bound", tol.ratio_bound);
  return tol;
}

}  // namespace

ExperimentPlan parse_plan_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentPlan plan;
  const std::string kind = j.value("experiment", "");
  if (kind == "weak_rate_time") {
    plan.kind = ExperimentPlan::Kind::weak_rate_time;
  } else if (kind == "weak_rate_spatial") {
    plan.kind = ExperimentPlan::Kind::weak_rate_spatial;
  } else if (kind == "representation_check") {
    plan.kind = ExperimentPlan::Kind::representation_check;
  } else if (kind == "moment_diagnostics") {
    plan.kind = ExperimentPlan::Kind::moment_diagnostics;
  } else if (kind == "assumption_check") {
    plan.kind = ExperimentPlan::Kind::assumption_check;
  } else if (kind == "simulate") {
    plan.kind = ExperimentPlan::Kind::simulate;
  } else {
    throw std::invalid_argument("config requires a valid \"experiment\" key");
  }

  plan.n = j.value("n", std::size_t{512});
  plan.T = j.value("T", 1.0);
  if (j.contains("tau_sweep")) {
    plan.tau_sweep = j.at("tau_sweep").get<std::vector<double>>();
  }
  if (j.contains("tau_sweep_log2")) {
    for (const auto& e : j.at("tau_sweep_log2")) {
      plan.tau_sweep.push_back(std::pow(2.0, e.get<double>()));
    }
  }
  if (j.contains("N_sweep")) {
    plan.N_sweep = j.at("N_sweep").get<std::vector<std::size_t>>();
  }
  plan.N_ref = j.value("N_ref", std::size_t{0});
  if (j.contains("tau")) plan.tau = j.at("tau").get<double>();
  if (j.contains("tau_log2")) plan.tau = std::pow(2.0, j.at("tau_log2").get<double>());
  plan.steps = j.value("steps", std::size_t{0});
  if (j.contains("covariance")) plan.cov = parse_covariance(j.at("covariance"));
  plan.f = j.contains("nonlinearity") ? parse_nonlinearity(j.at("nonlinearity"))
                                      : nonlinearity::zero();
  if (j.contains("functional")) {
    plan.functional = parse_functional(j.at("functional"));
  } else {
    plan.functional.modes = {{1, 1.0}};
  }
  if (j.contains("x0")) plan.x0 = parse_initial(j.at("x0"));
  if (j.contains("mc")) {
    plan.mc_samples = j.at("mc").value("samples", std::size_t{20000});
    plan.refinement = j.at("mc").value("refinement", std::size_t{64});
  }
  plan.quadrature_nodes = j.value("quadrature_nodes", std::size_t{8});
  plan.check_samples = j.value("check_samples", std::size_t{1000});
  plan.gamma = j.value("gamma", 0.2);
  if (j.contains("tolerances")) plan.tol = parse_tolerances(j.at("tolerances"));
  plan.seed = j.value("seed", std::uint64_t{0});

  plan.raw_json = j.dump();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan_json(ss.str());
}

// ---------------------------------------------------------------------------
// Output plumbing

const char* build_describe() {
#ifdef SGEE_GIT_DESCRIBE
  return SGEE_GIT_DESCRIBE;
#else
  return "unknown";
#endif
}

std::uint64_t config_hash(const std::string& canonical_json) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical_json) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string csv_header(const ExperimentPlan& plan, std::uint64_t seed,
                       const std::string& columns) {
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(plan.raw_json)));
  os << "# build " << build_describe() << "\n";
  os << "# seed " << seed << "\n";
  os << "# config " << hash << "\n";
  os << columns << "\n";
  return os.str();
}

json meta_json(const ExperimentPlan& plan, std::uint64_t seed) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash(plan.raw_json)));
  return json{{"build", build_describe()}, {"seed", seed}, {"config", hash}};
}

json fit_json(const RateFit& fit) {
  json points = json::array();
  for (const RatePoint& p : fit.points) {
    points.push_back({{"h", p.h},
                      {"error", p.error},
                      {"stderr", p.stderr_},
                      {"samples", p.samples}});
  }
  return json{{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"slope_ci", {fit.slope_ci_lo, fit.slope_ci_hi}},
              {"r_squared", fit.r_squared},
              {"used", fit.used},
              {"points", std::move(points)}};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write output file: " + path);
  }
  out << content;
}

void emit_outputs(const ExperimentOutcome& outcome, const RunContext& ctx,
                  bool report_style) {
  if (ctx.out_prefix.empty()) return;
  if (!outcome.csv.empty()) {
    write_file(ctx.out_prefix + ".csv", outcome.csv);
  }
  write_file(ctx.out_prefix + (report_style ? ".report.json" : ".summary.json"),
             outcome.summary_json);
}

std::uint64_t effective_seed(const ExperimentPlan& plan, const RunContext& ctx) {
  return ctx.seed_overridden ? ctx.seed : plan.seed;
}

bool check_rate_tolerances(const RateFit& fit, const Tolerances& tol,
                           std::size_t total_points, json& checks) {
  bool pass = true;
  if (tol.slope_min) {
    const bool ok = fit.slope >= *tol.slope_min;
    checks["slope_min"] = {{"target", *tol.slope_min}, {"ok", ok}};
    pass = pass && ok;
  }
  if (tol.slope_max) {
    const bool ok = fit.slope <= *tol.slope_max;
    checks["slope_max"] = {{"target", *tol.slope_max}, {"ok", ok}};
    pass = pass && ok;
  }
  if (tol.r2_min) {
    const bool ok = fit.r_squared >= *tol.r2_min;
    checks["r2_min"] = {{"target", *tol.r2_min}, {"ok", ok}};
    pass = pass && ok;
  }
  checks["all_points_used"] = fit.used == total_points;
  return pass;
}

// Deterministic block-parallel Monte Carlo: partial accumulators indexed by
// block, merged in block order, so the totals do not depend on the worker
// count.
constexpr std::size_t kMcBlock = 64;

template <typename MakeWorker>
MeanAccumulator parallel_mc(std::size_t samples, MakeWorker&& make_worker) {
  const std::size_t nblocks = (samples + kMcBlock - 1) / kMcBlock;
  std::vector<MeanAccumulator> accs(nblocks);
#pragma omp parallel
  {
    auto worker = make_worker();
#pragma omp for schedule(dynamic)
    for (long b = 0; b < static_cast<long>(nblocks); ++b) {
      const std::size_t begin = static_cast<std::size_t>(b) * kMcBlock;
      const std::size_t end = std::min(samples, begin + kMcBlock);
      for (std::size_t s = begin; s < end; ++s) {
        worker(s, accs[static_cast<std::size_t>(b)]);
      }
    }
  }
  MeanAccumulator total;
  for (const MeanAccumulator& a : accs) total.merge(a);
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Temporal weak rate

ExperimentOutcome run_weak_rate_time(const ExperimentPlan& plan,
                                     const RunContext& ctx) {
  if (plan.tau_sweep.size() < 3) {
    throw std::invalid_argument("weak_rate_time: tau_sweep needs >= 3 entries");
  }
  const std::uint64_t seed = effective_seed(plan, ctx);
  const TestFunctional phi = plan.functional.build(plan.n);
  const SpectralVector x0 = plan.x0.build(plan.n);

  std::vector<RatePoint> points;
  for (double tau : plan.tau_sweep) {
    const auto M = static_cast<std::size_t>(std::llround(plan.T / tau));
    SchemeConfig cfg = SchemeConfig::uniform(plan.n, plan.T, M, plan.cov, plan.f, x0);
    RatePoint pt;
    pt.h = tau;
    if (plan.f.is_diag_linear()) {
      const ValueWithError err = lhs_weak_error(cfg, phi, {0, 0}, SeedPath{seed});
      pt.error = std::fabs(err.value);
      pt.stderr_ = 0.0;
      pt.samples = 0;
    } else {
      const std::size_t refinement = plan.refinement;
      MeanAccumulator acc = parallel_mc(plan.mc_samples, [&]() {
        return [&, engine = std::make_shared<ExpEulerEngine>(cfg),
                coarse = std::vector<double>(),
                fine = std::vector<double>()](std::size_t s,
                                              MeanAccumulator& out) mutable {
          engine->run_coupled(SeedPath{seed, s, 0}, refinement, coarse, fine);
          out.add(phi_eval(phi, coarse) - phi_eval(phi, fine));
        };
      });
      pt.error = std::fabs(acc.mean());
      pt.stderr_ = acc.stderr_of_mean();
      pt.samples = acc.count();
    }
    points.push_back(pt);
  }

  ExperimentOutcome outcome;
  outcome.fit = fit_rate(points);

  std::ostringstream csv;
  csv << csv_header(plan, seed, "h,error,stderr,samples");
  for (const RatePoint& p : points) {
    csv << fmt(p.h) << "," << fmt(p.error) << "," << fmt(p.stderr_) << ","
        << p.samples << "\n";
  }
  outcome.csv = csv.str();

  json checks = json::object();
  outcome.pass = check_rate_tolerances(outcome.fit, plan.tol, points.size(), checks);

  json summary = meta_json(plan, seed);
  summary["experiment"] = "weak_rate_time";
  summary["fit"] = fit_json(outcome.fit);
  summary["checks"] = checks;
  summary["pass"] = outcome.pass;
  outcome.summary_json = summary.dump(2) + "\n";
  emit_outputs(outcome, ctx, false);
  return outcome;
}

// ---------------------------------------------------------------------------
// Spatial weak rate

ExperimentOutcome run_weak_rate_spatial(const ExperimentPlan& plan,
                                        const RunContext& ctx) {
  if (plan.N_sweep.size() < 3) {
    throw std::invalid_argument("weak_rate_spatial: N_sweep needs >= 3 entries");
  }
  double tau = plan.tau;
  if (tau <= 0.0) {
    if (plan.steps == 0) {
      throw std::invalid_argument("weak_rate_spatial: set tau or steps");
    }
    tau = plan.T / static_cast<double>(plan.steps);
  }
  const auto M = static_cast<std::size_t>(std::llround(plan.T / tau));
  const std::size_t N_ref =
      plan.N_ref ? plan.N_ref
                 : 4 * *std::max_element(plan.N_sweep.begin(), plan.N_sweep.end());
  const std::uint64_t seed = effective_seed(plan, ctx);

  auto endpoint_expectation = [&](std::size_t N) {
    SchemeConfig cfg = SchemeConfig::uniform(N, plan.T, M, plan.cov, plan.f,
                                             plan.x0.build(N));
    const TestFunctional phiN = plan.functional.build(N);
    return expectation(phiN, scheme_endpoint_law(cfg));
  };

  std::vector<RatePoint> points;
  if (plan.f.is_diag_linear()) {
    const double ref_value = endpoint_expectation(N_ref);
    for (std::size_t N : plan.N_sweep) {
      RatePoint pt;
      pt.h = eigenvalue(N);
      pt.error = std::fabs(endpoint_expectation(N) - ref_value);
      points.push_back(pt);
    }
  } else {
    if (M > (std::size_t{1} << 22)) {
      throw std::invalid_argument(
          "weak_rate_spatial: Monte Carlo at this tau is infeasible; use the "
          "diagonal-linear family or a coarser tau");
    }
    for (std::size_t N : plan.N_sweep) {
      SchemeConfig cfg_N = SchemeConfig::uniform(N, plan.T, M, plan.cov, plan.f,
                                                 plan.x0.build(N));
      SchemeConfig cfg_ref = SchemeConfig::uniform(N_ref, plan.T, M, plan.cov,
                                                   plan.f, plan.x0.build(N_ref));
      const TestFunctional phiN = plan.functional.build(N);
      const TestFunctional phiR = plan.functional.build(N_ref);
      MeanAccumulator acc = parallel_mc(plan.mc_samples, [&]() {
        return [&, eN = std::make_shared<ExpEulerEngine>(cfg_N),
                eR = std::make_shared<ExpEulerEngine>(cfg_ref),
                bufN = std::vector<double>(),
                bufR = std::vector<double>()](std::size_t s,
                                              MeanAccumulator& out) mutable {
          // Shared Brownian modes couple the two truncation levels.
          eN->run(SeedPath{seed, s, 0}, bufN);
          eR->run(SeedPath{seed, s, 0}, bufR);
          out.add(phi_eval(phiN, bufN) - phi_eval(phiR, bufR));
        };
      });
      RatePoint pt;
      pt.h = eigenvalue(N);
      pt.error = std::fabs(acc.mean());
      pt.stderr_ = acc.stderr_of_mean();
      pt.samples = acc.count();
      points.push_back(pt);
    }
  }

  ExperimentOutcome outcome;
  outcome.fit = fit_rate(points);

  std::ostringstream csv;
  csv << csv_header(plan, seed, "h,error,stderr,samples");
  for (const RatePoint& p : points) {
    csv << fmt(p.h) << "," << fmt(p.error) << "," << fmt(p.stderr_) << ","
        << p.samples << "\n";
  }
  outcome.csv = csv.str();

  json checks = json::object();
  outcome.pass = check_rate_tolerances(outcome.fit, plan.tol, points.size(), checks);

  json summary = meta_json(plan, seed);
  summary["experiment"] = "weak_rate_spatial";
  summary["tau"] = tau;
  summary["N_ref"] = N_ref;
  summary["fit"] = fit_json(outcome.fit);
  summary["checks"] = checks;
  summary["pass"] = outcome.pass;
  outcome.summary_json = summary.dump(2) + "\n";
  emit_outputs(outcome, ctx, false);
  return outcome;
}

// ---------------------------------------------------------------------------
// Representation identity

ExperimentOutcome run_representation_check(const ExperimentPlan& plan,
                                           const RunContext& ctx) {
  std::size_t M = plan.steps;
  double tau = plan.tau;
  if (M == 0 && tau > 0.0) {
    M = static_cast<std::size_t>(std::llround(plan.T / tau));
  }
  if (M == 0) {
    throw std::invalid_argument("representation_check: set steps or tau");
  }
  const std::uint64_t seed = effective_seed(plan, ctx);
  SchemeConfig cfg = SchemeConfig::uniform(plan.n, plan.T, M, plan.cov, plan.f,
                                           plan.x0.build(plan.n));
  const TestFunctional phi = plan.functional.build(plan.n);

  RepresentationOptions opts;
  opts.quadrature_nodes = plan.quadrature_nodes;
  opts.mc_samples = plan.mc_samples;
  opts.path = SeedPath{seed};
  if (plan.tol.residual_abs) opts.residual_tolerance = *plan.tol.residual_abs;
  if (plan.tol.stderr_mult) opts.stderr_multiplier = *plan.tol.stderr_mult;

  ExperimentOutcome outcome;
  outcome.representation = verify_representation(cfg, phi, opts);
  const RepresentationReport& rep = outcome.representation;
  outcome.pass = rep.pass;

  json summary = meta_json(plan, seed);
  summary["experiment"] = "representation_check";
  summary["report"] = {
      {"lhs", {{"value", rep.lhs.value}, {"stderr", rep.lhs.stderr_}}},
      {"drift_term",
       {{"value", rep.drift_term.value}, {"stderr", rep.drift_term.stderr_}}},
      {"trace_term",
       {{"value", rep.trace_term.value}, {"stderr", rep.trace_term.stderr_}}},
      {"residual", rep.residual},
      {"quadrature_error", rep.quadrature_error},
      {"quadrature_nodes", rep.quadrature_nodes},
      {"mc_samples", rep.mc_samples},
      {"tolerance", rep.tolerance},
      {"pass", rep.pass}};
  summary["pass"] = outcome.pass;
  outcome.summary_json = summary.dump(2) + "\n";
  emit_outputs(outcome, ctx, true);
  return outcome;
}

// ---------------------------------------------------------------------------
// Moment diagnostics

ExperimentOutcome run_moment_diagnostics(const ExperimentPlan& plan,
                                         const RunContext& ctx) {
  if (plan.tau_sweep.size() < 3) {
    throw std::invalid_argument("moment_diagnostics: tau_sweep needs >= 3 entries");
  }
  const std::uint64_t seed = effective_seed(plan, ctx);
  const SpectralVector x0 = plan.x0.build(plan.n);

  struct Row {
    double tau;
    double sup_frac;
    double h1_end;
    double increment;
    std::size_t samples;
  };
  std::vector<Row> rows;

  CollocationGrid grid(plan.n);
  for (double tau : plan.tau_sweep) {
    const auto M = static_cast<std::size_t>(std::llround(plan.T / tau));
    SchemeConfig cfg = SchemeConfig::uniform(plan.n, plan.T, M, plan.cov, plan.f, x0);

    std::vector<double> frac_sum(M + 1, 0.0);  // E ||(-A)^g Y_m||^2 per step
    double h1_sum = 0.0;
    double incr_sum = 0.0;
    const double s_mid = 0.5 * tau;
    for (std::size_t sample = 0; sample < plan.mc_samples; ++sample) {
      const SeedPath path{seed, sample, 0};
      SpectralVector y = x0;
      for (std::size_t m = 0; m <= M; ++m) {
        double frac = 0.0;
        for (std::size_t i = 0; i < plan.n; ++i) {
          frac += std::pow(eigenvalue(i + 1), 2.0 * plan.gamma) * y[i] * y[i];
        }
        frac_sum[m] += frac;
        if (m == M) break;
        const SeedPath step_path = path.with_counter(m);
        const auto [to_s, rest] =
            sample_subinterval_pair(cfg.cov, tau, s_mid, plan.n, step_path);
        const SpectralVector ext = continuous_extension(cfg, y, s_mid, to_s, grid);
        double d2 = 0.0;
        for (std::size_t i = 0; i < plan.n; ++i) {
          const double d = ext[i] - y[i];
          d2 += d * d;
        }
        incr_sum += d2;
        const NoiseIncrement inc =
            sample_filtered_increment(cfg.cov, tau, plan.n, step_path);
        y = step(cfg, y, inc, grid);
      }
      double h1 = 0.0;
      for (std::size_t i = 0; i < plan.n; ++i) {
        h1 += eigenvalue(i + 1) * y[i] * y[i];
      }
      h1_sum += h1;
    }
    const double inv_samples = 1.0 / static_cast<double>(plan.mc_samples);
    double sup_frac = 0.0;
    for (double f : frac_sum) sup_frac = std::max(sup_frac, f * inv_samples);
    Row row;
    row.tau = tau;
    row.sup_frac = std::sqrt(sup_frac);
    row.h1_end = std::sqrt(h1_sum * inv_samples);
    row.increment =
        std::sqrt(incr_sum * inv_samples / static_cast<double>(M));
    row.samples = plan.mc_samples;
    rows.push_back(row);
  }

  // Trend fits: endpoint H^1 norm and mid-step increment against tau.
  std::vector<RatePoint> h1_pts, incr_pts;
  for (const Row& r : rows) {
    h1_pts.push_back({r.tau, r.h1_end, 0.0, r.samples});
    incr_pts.push_back({r.tau, r.increment, 0.0, r.samples});
  }
  const RateFit h1_fit = fit_rate(h1_pts);
  const RateFit incr_fit = fit_rate(incr_pts);
  double sup_ratio = 1.0;
  double sup_min = rows.front().sup_frac, sup_max = rows.front().sup_frac;
  for (const Row& r : rows) {
    sup_min = std::min(sup_min, r.sup_frac);
    sup_max = std::max(sup_max, r.sup_frac);
  }
  if (sup_min > 0.0) sup_ratio = sup_max / sup_min;

  ExperimentOutcome outcome;
  std::ostringstream csv;
  csv << csv_header(plan, seed, "tau,sup_frac_moment,h1_endpoint,increment,samples");
  for (const Row& r : rows) {
    csv << fmt(r.tau) << "," << fmt(r.sup_frac) << "," << fmt(r.h1_end) << ","
        << fmt(r.increment) << "," << r.samples << "\n";
  }
  outcome.csv = csv.str();

  bool pass = true;
  json checks = json::object();
  if (plan.tol.h1_slope_min) {
    const bool ok = h1_fit.slope >= *plan.tol.h1_slope_min;
    checks["h1_slope_min"] = {{"target", *plan.tol.h1_slope_min}, {"ok", ok}};
    pass = pass && ok;
  }
  if (plan.tol.increment_slope_min) {
    const bool ok = incr_fit.slope >= *plan.tol.increment_slope_min;
    checks["increment_slope_min"] = {{"target", *plan.tol.increment_slope_min},
                                     {"ok", ok}};
    pass = pass && ok;
  }
  if (plan.tol.sup_ratio_max) {
    const bool ok = sup_ratio <= *plan.tol.sup_ratio_max;
    checks["sup_ratio_max"] = {{"target", *plan.tol.sup_ratio_max}, {"ok", ok}};
    pass = pass && ok;
  }
  outcome.pass = pass;

  json summary = meta_json(plan, seed);
  summary["experiment"] = "moment_diagnostics";
  summary["gamma"] = plan.gamma;
  summary["h1_fit"] = fit_json(h1_fit);
  summary["increment_fit"] = fit_json(incr_fit);
  summary["sup_moment_ratio"] = sup_ratio;
  summary["checks"] = checks;
  summary["pass"] = pass;
  outcome.summary_json = summary.dump(2) + "\n";
  emit_outputs(outcome, ctx, true);
  return outcome;
}

// ---------------------------------------------------------------------------
// Nonlinearity condition check

ExperimentOutcome run_assumption_check(const ExperimentPlan& plan,
                                       const RunContext& ctx) {
  const std::uint64_t seed = effective_seed(plan, ctx);
  const double bound = plan.tol.ratio_bound.value_or(0.0);

  auto report_at = [&](std::size_t n) {
    CollocationGrid grid(n);
    return check_nonlinearity(plan.f, n, grid, plan.check_samples,
                              SeedPath{seed}, bound);
  };
  const NonlinearityCheckReport base = report_at(plan.n);
  const NonlinearityCheckReport doubled = report_at(2 * plan.n);

  auto stable = [](double lo, double hi) { return hi <= lo * 1.1 + 1e-9; };
  const bool stability = stable(base.max_growth, doubled.max_growth) &&
                         stable(base.max_first, doubled.max_first) &&
                         stable(base.max_second, doubled.max_second) &&
                         stable(base.max_dual, doubled.max_dual);

  ExperimentOutcome outcome;
  outcome.pass = base.within_bound && stability;

  auto ratios_json = [](const NonlinearityCheckReport& r) {
    return json{{"growth", r.max_growth},
                {"first_derivative", r.max_first},
                {"second_derivative_smoothed", r.max_second},
                {"first_derivative_dual", r.max_dual},
                {"samples", r.samples},
                {"within_bound", r.within_bound}};
  };
  json summary = meta_json(plan, seed);
  summary["experiment"] = "assumption_check";
  summary["nonlinearity"] = plan.f.name;
  summary["bound"] = bound;
  summary["ratios"] = ratios_json(base);
  summary["ratios_doubled_n"] = ratios_json(doubled);
  summary["stable_under_refinement"] = stability;
  summary["pass"] = outcome.pass;
  outcome.summary_json = summary.dump(2) + "\n";
  emit_outputs(outcome, ctx, true);
  return outcome;
}

// ---------------------------------------------------------------------------
// Single path simulation

ExperimentOutcome run_simulate(const ExperimentPlan& plan, const RunContext& ctx) {
  std::size_t M = plan.steps;
  if (M == 0) {
    if (!(plan.tau > 0.0)) {
      throw std::invalid_argument("simulate: set steps or tau");
    }
    M = static_cast<std::size_t>(std::llround(plan.T / plan.tau));
  }
  const std::uint64_t seed = effective_seed(plan, ctx);
  SchemeConfig cfg = SchemeConfig::uniform(plan.n, plan.T, M, plan.cov, plan.f,
                                           plan.x0.build(plan.n));
  const SchemePath path = integrate(cfg, SeedPath{seed});

  ExperimentOutcome outcome;
  std::ostringstream csv;
  csv << csv_header(plan, seed, "step,t,l2_norm,h1_norm");
  for (std::size_t m = 0; m < path.states.size(); ++m) {
    const SpectralVector& y = path.states[m];
    csv << m << "," << fmt(cfg.tau * static_cast<double>(m)) << ","
        << fmt(l2_norm(y)) << "," << fmt(sobolev_norm(y, 1.0)) << "\n";
  }
  outcome.csv = csv.str();

  json coeffs = json::array();
  for (double c : path.states.back().coeffs) coeffs.push_back(c);
  json summary = meta_json(plan, seed);
  summary["experiment"] = "simulate";
  summary["steps"] = M;
  summary["endpoint_coefficients"] = coeffs;
  summary["pass"] = true;
  outcome.summary_json = summary.dump(2) + "\n";
  outcome.pass = true;
  emit_outputs(outcome, ctx, false);
  return outcome;
}

ExperimentOutcome run_experiment(const ExperimentPlan& plan, const RunContext& ctx) {
  if (ctx.threads >= 1) {
    omp_set_num_threads(ctx.threads);
  }
  switch (plan.kind) {
    case ExperimentPlan::Kind::weak_rate_time:
      return run_weak_rate_time(plan, ctx);
    case ExperimentPlan::Kind::weak_rate_spatial:
      return run_weak_rate_spatial(plan, ctx);
    case ExperimentPlan::Kind::representation_check:
      return run_representation_check(plan, ctx);
    case ExperimentPlan::Kind::moment_diagnostics:
      return run_moment_diagnostics(plan, ctx);
    case ExperimentPlan::Kind::assumption_check:
      return run_assumption_check(plan, ctx);
    case ExperimentPlan::Kind::simulate:
      return run_simulate(plan, ctx);
  }
  throw std::logic_error("run_experiment: unreachable");
}

}  // namespace sgee
