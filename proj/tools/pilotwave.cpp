#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pilotwave/experiment.hpp"

namespace {

using namespace pilotwave;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::string> out;
  std::vector<std::string> set;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_engine) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--seed", o.seed, "random seed for initial positions");
  if (with_engine) cmd->add_option("--engine", o.engine, "regional, oracle or both");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.set, "override a config key (key=value), repeatable");
}

ExperimentConfig resolve(ExperimentConfig cfg, const CommonOptions& o) {
  if (!o.config.empty()) apply_config_file(cfg, o.config);
  for (const auto& kv : o.set) apply_assignment(cfg, kv);
  if (o.seed) cfg.seed = *o.seed;
  if (o.engine) cfg.engine = parse_engine(*o.engine);
  if (o.out) cfg.out = *o.out;
  return cfg;
}

int report(const RunReport& r) {
  for (const auto& row : r.summary) {
    std::cout << row.quantity << ' ' << fmt(row.value);
    if (!std::isnan(row.ci_low)) std::cout << " [" << fmt(row.ci_low) << ", " << fmt(row.ci_high) << ']';
    std::cout << '\n';
  }
  for (const auto& f : r.flags)
    std::cout << "check " << f.name << ' ' << fmt(f.value) << " limit " << fmt(f.limit) << ' '
              << (f.pass ? "ok" : "FAILED") << '\n';
  for (const auto& file : r.files) std::cout << "wrote " << file << '\n';
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pilot-wave scattering and tunneling laboratory"};
  app.require_subcommand(1);

  CommonOptions scatter_opt, tunnel_opt, conv_opt, crit_opt;
  auto* scatter = app.add_subcommand("scatter", "step potential scattering (default E=0.5, V0=0.375)");
  add_common(scatter, scatter_opt, true);
  auto* tunnel = app.add_subcommand("tunnel", "rectangular barrier tunneling (default E=0.25, V0=0.5, kappa0 a=1)");
  add_common(tunnel, tunnel_opt, true);
  auto* conv = app.add_subcommand("convergence", "oracle continuity-residual convergence study");
  add_common(conv, conv_opt, false);
  auto* crit = app.add_subcommand("critical", "critical trajectory: drift geometry and bisection");
  add_common(crit, crit_opt, false);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig step_defaults;
    step_defaults.out = "out";
    ExperimentConfig barrier_defaults;
    barrier_defaults.scenario = "barrier";
    barrier_defaults.E = 0.25;
    barrier_defaults.V0 = 0.5;
    barrier_defaults.a = std::sqrt(2.0);
    if (scatter->parsed()) return report(run_scatter(resolve(step_defaults, scatter_opt)));
    if (tunnel->parsed()) return report(run_scatter(resolve(barrier_defaults, tunnel_opt)));
    if (conv->parsed()) return report(run_convergence(resolve(step_defaults, conv_opt)));
    if (crit->parsed()) return report(run_critical(resolve(step_defaults, crit_opt)));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
