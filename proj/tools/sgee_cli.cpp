// Command line front end: declarative experiments around the spectral
// Galerkin / exponential Euler discretization of the 1-D stochastic heat
// equation with additive noise.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "sgee/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON experiment description")
      ->required();
  cmd->add_option("--seed", args.seed, "Override the config seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out, "Output file prefix");
  cmd->add_option("--threads", args.threads, "Worker count (results are identical for any value)")
      ->check(CLI::PositiveNumber);
}

int run(const CommonArgs& args, const std::string& kind) {
  std::ifstream in(args.config);
  if (!in) {
    std::cerr << "error: cannot open config file: " << args.config << "\n";
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
    return 1;
  }
  if (!doc.contains("experiment")) {
    doc["experiment"] = kind;
  } else if (doc.at("experiment").get<std::string>() != kind) {
    std::cerr << "error: config declares experiment \""
              << doc.at("experiment").get<std::string>()
              << "\" but the subcommand expects \"" << kind << "\"\n";
    return 1;
  }

  sgee::ExperimentPlan plan;
  try {
    plan = sgee::parse_plan_json(doc.dump());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  sgee::RunContext ctx;
  ctx.seed = args.seed;
  ctx.seed_overridden = args.seed_set;
  ctx.threads = args.threads;
  ctx.out_prefix = args.out;

  try {
    const sgee::ExperimentOutcome outcome = sgee::run_experiment(plan, ctx);
    std::cout << outcome.summary_json;
    return outcome.pass ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sgee - weak-error experiments for the exponential Euler / spectral "
      "Galerkin discretization of the semilinear stochastic heat equation"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* kind;
    const char* help;
  };
  const Sub subs[] = {
      {"simulate", "simulate", "Integrate one path and write its norms"},
      {"weak-rate-time", "weak_rate_time",
       "Temporal weak convergence sweep over step sizes"},
      {"weak-rate-spatial", "weak_rate_spatial",
       "Spatial weak convergence sweep over truncation levels"},
      {"verify-representation", "representation_check",
       "Evaluate both sides of the weak-error identity"},
      {"moment-diagnostics", "moment_diagnostics",
       "Moment boundedness and increment-size diagnostics"},
      {"check-assumptions", "assumption_check",
       "Empirical growth/derivative ratio checks for the nonlinearity"},
  };

  CommonArgs args[6];
  std::string kinds[6];
  int selected = -1;
  for (int i = 0; i < 6; ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, args[i]);
    kinds[i] = subs[i].kind;
    cmd->callback([&selected, i]() { selected = i; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors exit 1
  }
  if (selected < 0) {
    std::cerr << "error: no subcommand selected\n";
    return 1;
  }
  return run(args[selected], kinds[selected]);
}
